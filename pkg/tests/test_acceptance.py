"""Acceptance criteria, one test each.

Every test records a single ``[ACCEPT n] PASS|FAIL`` line with the measured
values next to their pinned thresholds; pytest prints them in an
"acceptance criteria" section of the terminal summary. Run this file directly with
``python3 tests/test_acceptance.py`` for just the summary lines.
"""

from __future__ import annotations

import io
import os
import random
import sys
import time
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import oracle  # noqa: E402
from conftest import ACCEPTANCE_LINES, corpus_file, load_case, source_lts, write_files  # noqa: E402
from negatives import CASES as NEGATIVE_CASES  # noqa: E402
from randsys import gen_formula, generate  # noqa: E402

from seni.cli import main  # noqa: E402
from seni.core import elaborate  # noqa: E402
from seni.corpus import corpus_cases  # noqa: E402
from seni.errors import Diagnostics, SeniError  # noqa: E402
from seni.explorer import build_lts  # noqa: E402
from seni.refine import ActionMap, NotSimulated, Simulated, check_simulation, derive_action_map  # noqa: E402
from seni.sema import load_program  # noqa: E402
from seni.verify import (  # noqa: E402
    Holds,
    Violated,
    always,
    check_property,
    find_satisfying_state,
    negate,
    parse_formula,
    property_defs,
    replay_trace,
)

# Pinned thresholds.
TABLE_SECONDS = 5.0
TABLE_MAX_CONFIGS = 100_000
LABELING_SYSTEMS = 1000
EQUIVALENCE_SYSTEMS = 100
EQUIVALENCE_MAX_NODES = 10_000
FORMULAS_PER_LTS = 5
DETERMINISM_RUNS = 3
MIN_NEGATIVE_CASES = 20

# Every executable corpus system as (case, file, system).
CORPUS_SYSTEMS = [
    ("primary-philosopher", "PhilosopherAbstract.seni", "PhilosopherAbstract"),
    ("refined-philosopher", "Philosopher.seni", "Philosopher"),
    ("refinement-chain", "PhilosopherSlow.seni", "PhilosopherSlow"),
    ("broken-refinement", "PhilosopherBroken.seni", "PhilosopherBroken"),
    ("table-deadlock", "Fork.seni", "Fork"),
    ("table-deadlock", "Table.seni", "Table"),
]

PHILOSOPHER_SOURCES = [
    ("primary-philosopher", "PhilosopherAbstract.seni"),
    ("refined-philosopher", "Philosopher.seni"),
    ("table-deadlock", "Table.seni"),
]


@dataclass
class Outcome:
    ok: bool
    detail: str


def report(number: int, title: str, outcome: Outcome) -> None:
    status = "PASS" if outcome.ok else "FAIL"
    ACCEPTANCE_LINES.append(f"[ACCEPT {number}] {status} {title}: {outcome.detail}")


def corpus_ltss():
    for case, file, system in CORPUS_SYSTEMS:
        program = load_case(case, file)
        yield f"{case}/{system}", build_lts(elaborate(program, system, ["0"]))


# -- criteria -------------------------------------------------------------------------------

def deadlock_reproduction() -> Outcome:
    start = time.perf_counter()
    program = load_case("table-deadlock", "Table.seni")
    inst = elaborate(program, "Table", ["0"])
    lts = build_lts(inst)
    prop = next(p for p in property_defs(inst) if p.name == "DeadlockFree")
    verdict = check_property(prop, lts)
    elapsed = time.perf_counter() - start
    if not isinstance(verdict, Violated):
        return Outcome(False, f"DeadlockFree is {verdict.status}, expected VIOLATED")
    replayed = replay_trace(inst, verdict.trace)
    last = verdict.trace.states[-1]
    exact = last == lts.configs[verdict.node].state
    all_waiting = all(f"philosophers[{i}].Waiting" in lts.labels[verdict.node] for i in range(3))
    ok = (replayed and exact and all_waiting and elapsed < TABLE_SECONDS
          and lts.num_nodes < TABLE_MAX_CONFIGS)
    return Outcome(ok, f"VIOLATED, trace {len(verdict.trace)} steps, replay={replayed}, "
                       f"exact={exact}, all waiting={all_waiting}, "
                       f"{elapsed:.2f}s (<{TABLE_SECONDS}), "
                       f"{lts.num_nodes} configurations (<{TABLE_MAX_CONFIGS})")


def structural_counts() -> Outcome:
    abstract = build_lts(elaborate(load_case("primary-philosopher", "PhilosopherAbstract.seni"),
                                   "PhilosopherAbstract", ["0"]))
    refined = build_lts(elaborate(load_case("refined-philosopher", "Philosopher.seni"),
                                  "Philosopher", ["0"]))
    ref_a, ref_r = oracle.abstract_philosopher(), oracle.refined_philosopher()
    got = (abstract.num_nodes, abstract.num_edges, refined.num_nodes)
    want = (ref_a.nodes, ref_a.edges, ref_r.nodes)
    ok = got == want == (2, 2, 6)
    return Outcome(ok, f"primary {got[0]} nodes/{got[1]} edges, refined {got[2]} nodes; "
                       f"oracle {want[0]}/{want[1]}, {want[2]}")


def refinement() -> Outcome:
    program = load_case("refinement", "Philosopher.seni")
    a = build_lts(elaborate(program, "PhilosopherAbstract", ["0"]))
    r = build_lts(elaborate(program, "Philosopher", ["0"]))
    main_ok = isinstance(check_simulation(
        a, r, derive_action_map(program["PhilosopherAbstract"], program["Philosopher"])),
        Simulated)
    reflexive = {name: isinstance(check_simulation(lts, lts, ActionMap.of_lts(lts)), Simulated)
                 for name, lts in corpus_ltss()}
    broken = load_case("broken-refinement", "PhilosopherBroken.seni")
    mutant = check_simulation(
        build_lts(elaborate(broken, "PhilosopherAbstract", ["0"])),
        build_lts(elaborate(broken, "PhilosopherBroken", ["0"])),
        derive_action_map(broken["PhilosopherAbstract"], broken["PhilosopherBroken"]))
    mutant_ok = isinstance(mutant, NotSimulated) and mutant.action == "ReturnFork"
    ok = main_ok and all(reflexive.values()) and mutant_ok
    failing = [n for n, v in reflexive.items() if not v]
    return Outcome(ok, f"abstract simulates refined={main_ok}, reflexive on "
                       f"{sum(reflexive.values())}/{len(reflexive)} corpus LTSs"
                       f"{' (failing: ' + ', '.join(failing) + ')' if failing else ''}, "
                       f"mutant offending action={getattr(mutant, 'action', None)}")


def labeling_soundness() -> Outcome:
    nodes = agree = 0
    for seed in range(LABELING_SYSTEMS):
        gen = generate(random.Random(seed))
        lts = source_lts(gen.source, "Top", ("0",))
        names = gen.prop_names()
        for labels, config in zip(lts.labels, lts.configs):
            nodes += 1
            expected = {n for n in names if gen.evaluate(n, config.state)}
            agree += labels == expected
    ok = nodes > 0 and agree == nodes
    return Outcome(ok, f"{LABELING_SYSTEMS} systems, {agree}/{nodes} nodes agree (100% required)")


def _corpus_formula_checks(rng: random.Random) -> tuple[int, int]:
    checks = agree = 0
    for _, lts in corpus_ltss():
        names = lts.prop_names
        for _ in range(FORMULAS_PER_LTS):
            formula = gen_formula(rng, names)
            bad = [lts.depth[i] for i in range(lts.num_nodes)
                   if not formula.evaluate(lambda n, lab=lts.labels[i]: n in lab)]
            verdict = check_property(always(parse_formula(formula.text, lts.instance)), lts)
            checks += 1
            if bad:
                agree += isinstance(verdict, Violated) and len(verdict.trace) == min(bad)
            else:
                agree += isinstance(verdict, Holds)
    return checks, agree


def _random_formula_checks(rng: random.Random) -> tuple[int, int, int]:
    checks = agree = systems = 0
    seed = 0
    while systems < EQUIVALENCE_SYSTEMS:
        gen = generate(random.Random(10_000 + seed))
        seed += 1
        lts = source_lts(gen.source, "Top", ("0",), max_states=EQUIVALENCE_MAX_NODES + 1)
        if lts.num_nodes > EQUIVALENCE_MAX_NODES:
            continue
        systems += 1
        depths = gen.reachable()
        for _ in range(FORMULAS_PER_LTS):
            formula = gen_formula(rng, gen.prop_names())
            bad = [d for key, d in depths.items()
                   if not formula.evaluate(lambda n, s=dict(key): gen.evaluate(n, s))]
            verdict = check_property(always(parse_formula(formula.text, lts.instance)), lts)
            checks += 1
            if bad:
                agree += isinstance(verdict, Violated) and len(verdict.trace) == min(bad)
            else:
                agree += isinstance(verdict, Holds)
    return checks, agree, systems


def verifier_equivalence() -> Outcome:
    rng = random.Random(2024)
    c_checks, c_agree = _corpus_formula_checks(rng)
    r_checks, r_agree, systems = _random_formula_checks(rng)
    ok = c_agree == c_checks and r_agree == r_checks
    return Outcome(ok, f"corpus {c_agree}/{c_checks}, {systems} random systems "
                       f"{r_agree}/{r_checks} (verdict and counterexample length, 100% required)")


def sat_duality() -> Outcome:
    rng = random.Random(7)
    checks = agree = 0
    table = None
    for name, lts in corpus_ltss():
        if lts.truncated:
            continue
        if name.endswith("/Table"):
            table = lts
        for _ in range(FORMULAS_PER_LTS):
            phi = parse_formula(gen_formula(rng, lts.prop_names).text, lts.instance)
            none = find_satisfying_state(negate(phi), lts) is None
            holds = isinstance(check_property(always(phi), lts), Holds)
            checks += 1
            agree += none == holds
    model = find_satisfying_state(parse_formula("AllWaiting", table.instance), table)
    one_each = model is not None and all(
        sum(model.state[f"philosophers[{i}].h"].get(side) is not None
            for side in ("leftHand", "rightHand")) == 1
        for i in range(3))
    ok = agree == checks and one_each
    return Outcome(ok, f"{agree}/{checks} formulas dual, AllWaiting model at node "
                       f"{model.node if model else None} with one fork each={one_each}")


def _run_cli(argv: list[str]) -> tuple[int, str, str]:
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def determinism() -> Outcome:
    commands = [c.resolve(e.argv) for c in corpus_cases() for e in c.expectations
                if e.command in ("graph", "verify", "sat", "refine", "trace")]
    stable = 0
    for argv in commands:
        runs = {_run_cli(argv) for _ in range(DETERMINISM_RUNS)}
        stable += len(runs) == 1
    kinds = sorted({argv[0] for argv in commands})
    ok = stable == len(commands) and kinds == ["graph", "refine", "sat", "trace", "verify"]
    return Outcome(ok, f"{stable}/{len(commands)} commands byte-identical over "
                       f"{DETERMINISM_RUNS} runs ({', '.join(kinds)})")


def parser_fidelity(tmp_dir: str) -> Outcome:
    sources_ok = 0
    for case, file in PHILOSOPHER_SOURCES:
        try:
            load_program(corpus_file(case, file))
            sources_ok += 1
        except SeniError:
            pass
    located = 0
    for i, case in enumerate(NEGATIVE_CASES):
        directory = os.path.join(tmp_dir, f"neg{i}")
        os.makedirs(directory, exist_ok=True)
        write_files(Path(directory), case.clean_files())
        try:
            load_program(os.path.join(directory, case.entry))
            errors: list[SeniError] = []
        except Diagnostics as exc:
            errors = exc.errors
        except SeniError as exc:
            errors = [exc]
        fname, line, col = case.expected_location()
        if len(errors) == 1 and errors[0].span is not None:
            span = errors[0].span
            located += (os.path.basename(span.file), span.line, span.col) == (fname, line, col)
    n = len(NEGATIVE_CASES)
    ok = sources_ok == len(PHILOSOPHER_SOURCES) and n >= MIN_NEGATIVE_CASES and located == n
    return Outcome(ok, f"{sources_ok}/{len(PHILOSOPHER_SOURCES)} philosopher sources clean, {located}/{n} negative "
                       f"cases give one diagnostic at the expected location "
                       f"(at least {MIN_NEGATIVE_CASES} cases)")


# -- pytest entry points -------------------------------------------------------------------

def _check(number: int, title: str, outcome: Outcome) -> None:
    report(number, title, outcome)
    assert outcome.ok, outcome.detail


def test_1_deadlock_reproduction():
    _check(1, "table deadlock reproduction", deadlock_reproduction())


def test_2_structural_counts():
    _check(2, "structural state counts", structural_counts())


def test_3_refinement():
    _check(3, "refinement", refinement())


def test_4_labeling_soundness():
    _check(4, "labeling soundness", labeling_soundness())


def test_5_verifier_equivalence():
    _check(5, "verifier/enumeration equivalence", verifier_equivalence())


def test_6_sat_duality():
    _check(6, "satisfiability duality", sat_duality())


def test_7_determinism():
    _check(7, "determinism", determinism())


def test_8_parser_fidelity(tmp_path):
    _check(8, "parser fidelity", parser_fidelity(str(tmp_path)))


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        results = [
            (1, "table deadlock reproduction", deadlock_reproduction()),
            (2, "structural state counts", structural_counts()),
            (3, "refinement", refinement()),
            (4, "labeling soundness", labeling_soundness()),
            (5, "verifier/enumeration equivalence", verifier_equivalence()),
            (6, "satisfiability duality", sat_duality()),
            (7, "determinism", determinism()),
            (8, "parser fidelity", parser_fidelity(tmp)),
        ]
    for number, title, outcome in results:
        report(number, title, outcome)
    print("\n".join(ACCEPTANCE_LINES))
    sys.exit(0 if all(o.ok for _, _, o in results) else 1)
