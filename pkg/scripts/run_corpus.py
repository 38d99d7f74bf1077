"""Run every corpus manifest through the CLI and print one line per command."""

from __future__ import annotations

import argparse
import sys
import time

from seni.corpus import corpus_cases, run_expectation


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--case", help="run only this corpus case")
    parser.add_argument("--verbose", action="store_true", help="print command output")
    ns = parser.parse_args()

    failures = 0
    for case in corpus_cases():
        if ns.case and case.name != ns.case:
            continue
        for exp in case.expectations:
            start = time.perf_counter()
            outcome = run_expectation(case, exp)
            elapsed = time.perf_counter() - start
            status = "ok" if outcome.ok else "FAIL"
            failures += not outcome.ok
            print(f"{status:4} {case.name:20} exit {outcome.exit_code} "
                  f"(want {exp.exit_code}) {elapsed:6.2f}s  {' '.join(exp.argv)}")
            for text in outcome.missing:
                print(f"     missing: {text!r}")
            if ns.verbose:
                print(outcome.stdout + outcome.stderr)
    print(f"{failures} failing expectation(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
