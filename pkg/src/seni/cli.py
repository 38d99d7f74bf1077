"""Command-line entry point.

Exit codes: 0 success, 1 property violated / not simulated / unsatisfiable,
2 input error (syntax, types, elaboration, bad names or flags), 3 IO error,
4 inconclusive because the state bound was reached.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence, TextIO

from seni.core import SystemInstance, elaborate
from seni.errors import SeniError, UnresolvedProp
from seni.explorer import (
    DEFAULT_MAX_STATES,
    Lts,
    build_lts,
    export_dot,
    export_json,
    export_text,
    random_walk,
)
from seni.interp import format_value, to_json
from seni.refine import ActionMap, check_simulation, derive_action_map, render_result, result_json
from seni.sema import Program, load_program
from seni.verify import (
    find_satisfying_state,
    parse_formula,
    render_verdict,
    verdict_json,
    verify_program,
)

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_IO, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4
COMMANDS = ("check", "graph", "verify", "sat", "refine", "trace")


class UsageError(Exception):
    """Bad command-line input detected after argument parsing."""


@dataclass
class RunConfig:
    command: str
    entry_file: str
    entry_system: Optional[str] = None
    args: list[str] = field(default_factory=list)
    max_states: int = DEFAULT_MAX_STATES
    format: str = "text"
    search_paths: list[str] = field(default_factory=list)
    seed: int = 0
    steps: int = 10
    formula: str = ""
    abstract: str = ""
    refined: str = ""


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--system", help="entry system (default: the only one with a Main spec)")
    common.add_argument("--args", default="", help="comma-separated init arguments")
    common.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES,
                        help="bound on explored configurations")
    common.add_argument("--format", choices=("text", "json", "lts"), default="text")
    common.add_argument("--path", action="append", default=[],
                        help="import search directory (repeatable)")
    common.add_argument("--seed", type=int, default=0, help="seed for the trace command")
    common.add_argument("--steps", type=_non_negative, default=10,
                        help="number of steps for the trace command")

    parser = argparse.ArgumentParser(prog="seni", description="Check and explore .seni systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="parse and type-check").add_argument("file")
    sub.add_parser("graph", parents=[common], help="print the LTS").add_argument("file")
    sub.add_parser("verify", parents=[common], help="check static properties").add_argument("file")
    sat = sub.add_parser("sat", parents=[common], help="find a reachable state satisfying a formula")
    sat.add_argument("file")
    sat.add_argument("formula")
    ref = sub.add_parser("refine", parents=[common], help="check that ABSTRACT simulates REFINED")
    ref.add_argument("file")
    ref.add_argument("abstract")
    ref.add_argument("refined")
    sub.add_parser("trace", parents=[common], help="print one seeded random execution") \
        .add_argument("file")
    return parser


def parse_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(list(argv))
    return RunConfig(
        command=ns.command,
        entry_file=ns.file,
        entry_system=ns.system,
        args=[a for a in ns.args.split(",")] if ns.args != "" else [],
        max_states=ns.max_states,
        format=ns.format,
        search_paths=list(ns.path),
        seed=ns.seed,
        steps=ns.steps,
        formula=getattr(ns, "formula", ""),
        abstract=getattr(ns, "abstract", ""),
        refined=getattr(ns, "refined", ""),
    )


class Runner:
    def __init__(self, cfg: RunConfig, out: TextIO, err: TextIO):
        self.cfg = cfg
        self.out = out
        self.err = err

    # -- helpers -------------------------------------------------------------

    def emit(self, text: str) -> None:
        self.out.write(text if text.endswith("\n") else text + "\n")

    def emit_json(self, verdicts: list[dict], stats: dict, **extra: Any) -> None:
        doc = {"command": self.cfg.command, "verdicts": verdicts, "stats": stats}
        doc.update(extra)
        self.emit(json.dumps(doc, indent=2))

    def load(self) -> Program:
        return load_program(self.cfg.entry_file, self.cfg.search_paths)

    def entry(self, program: Program) -> str:
        name = self.cfg.entry_system
        if name is None:
            return program.default_entry()
        self.require_system(program, name)
        return name

    @staticmethod
    def require_system(program: Program, name: str) -> None:
        if name not in program.systems:
            raise UsageError(f"unknown system '{name}'")

    def instance(self, program: Program, name: Optional[str] = None) -> SystemInstance:
        return elaborate(program, name or self.entry(program), self.cfg.args)

    @staticmethod
    def lts_stats(lts: Lts) -> dict[str, Any]:
        return {"nodes": lts.num_nodes, "edges": lts.num_edges, "truncated": lts.truncated}

    # -- commands --------------------------------------------------------------

    def check(self) -> int:
        self.load()
        return EXIT_OK

    def graph(self) -> int:
        lts = build_lts(self.instance(self.load()), self.cfg.max_states)
        if self.cfg.format == "json":
            self.emit_json([], self.lts_stats(lts), lts=export_json(lts))
        elif self.cfg.format == "lts":
            self.emit(export_text(lts))
        else:
            self.emit(export_dot(lts))
        return EXIT_OK

    def verify(self) -> int:
        program = self.load()
        report = verify_program(program, self.entry(program), self.cfg.args,
                                self.cfg.max_states)
        main = report.ltss.get("Main") or next(iter(report.ltss.values()), None)
        stats = self.lts_stats(main) if main else {"nodes": 0, "edges": 0, "truncated": False}
        if self.cfg.format == "json":
            self.emit_json([verdict_json(v) for _, v in report.results], stats)
        else:
            lines = [render_verdict(v) for _, v in report.results]
            if not lines:
                lines.append("no static properties declared")
            lines.append(f"explored {stats['nodes']} configurations, {stats['edges']} edges"
                         + (" (truncated)" if stats["truncated"] else ""))
            self.emit("\n".join(lines))
        return report.exit_code

    def sat(self) -> int:
        program = self.load()
        inst = self.instance(program)
        formula = parse_formula(self.cfg.formula, inst)
        lts = build_lts(inst, self.cfg.max_states)
        model = find_satisfying_state(formula, lts)
        if model is not None:
            status, code = "SAT", EXIT_OK
        elif lts.truncated:
            status, code = "UNSAT", EXIT_INCONCLUSIVE
        else:
            status, code = "UNSAT", EXIT_FAIL
        if self.cfg.format == "json":
            verdict: dict[str, Any] = {"name": self.cfg.formula, "status": status}
            if model is not None:
                verdict["node"] = model.node
                verdict["state"] = {k: to_json(v) for k, v in model.state.items()}
            self.emit_json([verdict], self.lts_stats(lts))
        elif model is None:
            self.emit(f"UNSAT (truncated at {lts.bound})" if lts.truncated else "UNSAT")
        else:
            lines = [f"SAT at node {model.node}"]
            lines += [f"  {k} = {format_value(v)}" for k, v in model.state.items()]
            self.emit("\n".join(lines))
        return code

    def refine(self) -> int:
        program = self.load()
        abstract, refined = self.cfg.abstract, self.cfg.refined
        self.require_system(program, abstract)
        self.require_system(program, refined)
        a_def, r_def = program[abstract], program[refined]
        if abstract == refined:
            amap = None
        elif abstract in r_def.ancestors(program.systems):
            amap = derive_action_map(a_def, r_def)
        else:
            raise UsageError(f"system '{refined}' does not refine '{abstract}'")
        a_lts = build_lts(self.instance(program, abstract), self.cfg.max_states)
        r_lts = build_lts(self.instance(program, refined), self.cfg.max_states)
        result = check_simulation(a_lts, r_lts, amap if amap is not None
                                  else ActionMap.of_lts(r_lts))
        if self.cfg.format == "json":
            self.emit_json([result_json(result)], {
                "abstract": self.lts_stats(a_lts), "refined": self.lts_stats(r_lts)})
        else:
            self.emit(render_result(result))
        return EXIT_OK if result.status == "SIMULATED" else EXIT_FAIL

    def trace(self) -> int:
        inst = self.instance(self.load())
        trace = random_walk(inst, self.cfg.steps, self.cfg.seed)
        if self.cfg.format == "json":
            self.emit_json([], {"steps": len(trace)}, trace=trace.to_json())
        else:
            self.emit(trace.render())
        return EXIT_OK

    def run(self) -> int:
        try:
            return getattr(self, self.cfg.command)()
        except OSError as exc:
            self.err.write(f"error: cannot read {exc.filename or self.cfg.entry_file}: "
                           f"{exc.strerror or exc}\n")
            return EXIT_IO
        except UnresolvedProp as exc:
            self.err.write(exc.render("<formula>") + "\n")
            return EXIT_INPUT
        except SeniError as exc:
            self.err.write(exc.render(self.cfg.entry_file) + "\n")
            trace = getattr(exc, "trace", None)
            if trace is not None:
                self.err.write(trace.render() + "\n")
            return EXIT_INPUT
        except UsageError as exc:
            self.err.write(f"error: {exc}\n")
            return EXIT_INPUT
        except RecursionError:
            self.err.write("error: nesting too deep to process\n")
            return EXIT_INPUT
        except Exception as exc:  # keep the exit-code contract total
            self.err.write(f"error: internal: {type(exc).__name__}: {exc}\n")
            return EXIT_INPUT


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None,
         err: Optional[TextIO] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        cfg = parse_config(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    return Runner(cfg, out, err).run()


if __name__ == "__main__":
    sys.exit(main())
