from __future__ import annotations

import os
from typing import Optional, Sequence

import pytest
from hypothesis import HealthCheck, settings

from seni.core import SystemInstance, elaborate
from seni.corpus import CORPUS_DIR
from seni.explorer import Lts, build_lts
from seni.sema import Program, check_source, load_program

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def corpus_file(case: str, name: str) -> str:
    return os.path.join(CORPUS_DIR, case, name)


def load_case(case: str, name: str) -> Program:
    return load_program(corpus_file(case, name))


def instance_of(program: Program, system: Optional[str] = None,
                args: Sequence[str] = ("0",)) -> SystemInstance:
    return elaborate(program, system or program.default_entry(), list(args))


def corpus_lts(case: str, name: str, system: Optional[str] = None,
               args: Sequence[str] = ("0",), max_states: int = 1_000_000) -> Lts:
    return build_lts(instance_of(load_case(case, name), system, args), max_states)


def source_lts(source: str, system: Optional[str] = None, args: Sequence[str] = (),
               max_states: int = 1_000_000) -> Lts:
    program = check_source(source, "test.seni")
    return build_lts(instance_of(program, system, args), max_states)


@pytest.fixture(scope="session")
def table_lts() -> Lts:
    return corpus_lts("table-deadlock", "Table.seni")


@pytest.fixture(scope="session")
def refined_lts() -> Lts:
    return corpus_lts("refined-philosopher", "Philosopher.seni")


@pytest.fixture(scope="session")
def abstract_lts() -> Lts:
    return corpus_lts("primary-philosopher", "PhilosopherAbstract.seni")


def write_files(directory, files: dict[str, str]) -> None:
    for name, text in files.items():
        (directory / name).write_text(text, encoding="utf-8")


# One line per acceptance criterion, printed in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
