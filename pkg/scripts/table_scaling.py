"""State-space growth of the dining table as the number of seats grows.

Copies the table-deadlock corpus case into a scratch directory with the seat
count rewritten, then reports LTS size, build time and the depth of the
first configuration where every philosopher is waiting.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile
import time

from seni.core import elaborate
from seni.corpus import case
from seni.explorer import build_lts
from seni.sema import load_program
from seni.verify import check_property, property_defs


def write_table(directory: str, seats: int) -> str:
    src = case("table-deadlock")
    for name in src.sources:
        with open(src.path(name), encoding="utf-8") as fh:
            text = fh.read()
        text = text.replace("(id + 2) mod 3", f"(id + {seats - 1}) mod {seats}")
        text = re.sub(r"\) mod 3\b", f") mod {seats}", text)
        text = re.sub(r"replicate\(3,", f"replicate({seats},", text)
        with open(os.path.join(directory, name), "w", encoding="utf-8") as fh:
            fh.write(text)
    return os.path.join(directory, "Table.seni")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-seats", type=int, default=4)
    parser.add_argument("--max-states", type=int, default=2_000_000)
    ns = parser.parse_args()

    print(f"{'seats':>5} {'nodes':>9} {'edges':>10} {'build s':>8} {'verdict':>12} {'depth':>5}")
    for seats in range(2, ns.max_seats + 1):
        with tempfile.TemporaryDirectory() as tmp:
            program = load_program(write_table(tmp, seats))
            inst = elaborate(program, "Table", ["0"])
            start = time.perf_counter()
            lts = build_lts(inst, ns.max_states)
            elapsed = time.perf_counter() - start
            prop = next(p for p in property_defs(inst) if p.name == "DeadlockFree")
            verdict = check_property(prop, lts)
            depth = len(verdict.trace) if verdict.status == "VIOLATED" else "-"
            print(f"{seats:>5} {lts.num_nodes:>9} {lts.num_edges:>10} {elapsed:>8.2f} "
                  f"{verdict.status:>12} {depth:>5}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
