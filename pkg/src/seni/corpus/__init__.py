"""Example systems built around the dining philosophers, with expected CLI outcomes.

Each case directory is self-contained: its ``.seni`` files plus a
``manifest.txt`` made of ``$ <command line>`` lines, each followed by an
``exit N`` line and any number of ``contains <text>`` lines that must appear
in the command's output.
"""

from __future__ import annotations

import io
import os
import shlex
from dataclasses import dataclass, field
from typing import Optional

CORPUS_DIR = os.path.dirname(os.path.abspath(__file__))


@dataclass
class Expectation:
    argv: list[str]
    exit_code: int
    contains: list[str] = field(default_factory=list)

    @property
    def command(self) -> str:
        return self.argv[0]


@dataclass
class CorpusCase:
    name: str
    directory: str
    sources: list[str]
    expectations: list[Expectation]

    def path(self, source: str) -> str:
        return os.path.join(self.directory, source)

    def resolve(self, argv: list[str]) -> list[str]:
        """Make ``.seni`` arguments absolute so commands run from any directory."""
        return [self.path(a) if a.endswith(".seni") else a for a in argv]


@dataclass
class Outcome:
    expectation: Expectation
    exit_code: int
    stdout: str
    stderr: str

    @property
    def missing(self) -> list[str]:
        text = self.stdout + self.stderr
        return [c for c in self.expectation.contains if c not in text]

    @property
    def ok(self) -> bool:
        return self.exit_code == self.expectation.exit_code and not self.missing


def parse_manifest(text: str) -> list[Expectation]:
    out: list[Expectation] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("$ "):
            out.append(Expectation(shlex.split(line[2:]), 0))
        elif not out:
            raise ValueError(f"manifest line {lineno}: expected a '$ command' line first")
        elif line.startswith("exit "):
            out[-1].exit_code = int(line[5:])
        elif line.startswith("contains "):
            out[-1].contains.append(raw.split("contains ", 1)[1])
        else:
            raise ValueError(f"manifest line {lineno}: cannot parse {raw!r}")
    return out


def corpus_cases(root: Optional[str] = None) -> list[CorpusCase]:
    root = root or CORPUS_DIR
    cases = []
    for name in sorted(os.listdir(root)):
        directory = os.path.join(root, name)
        manifest = os.path.join(directory, "manifest.txt")
        if not os.path.isfile(manifest):
            continue
        with open(manifest, encoding="utf-8") as fh:
            expectations = parse_manifest(fh.read())
        sources = sorted(f for f in os.listdir(directory) if f.endswith(".seni"))
        cases.append(CorpusCase(name, directory, sources, expectations))
    return cases


def case(name: str) -> CorpusCase:
    for c in corpus_cases():
        if c.name == name:
            return c
    raise KeyError(name)


def run_expectation(c: CorpusCase, exp: Expectation) -> Outcome:
    from seni.cli import main

    out, err = io.StringIO(), io.StringIO()
    code = main(c.resolve(exp.argv), out, err)
    return Outcome(exp, code, out.getvalue(), err.getvalue())
