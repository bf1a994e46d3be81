"""Derive answers for every benchmark program and classify each with the
fixpoint oracle; prints one row per program."""
from __future__ import annotations

import argparse
import collections
import pathlib
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from eqlp.fixpoint import check_correct_answer, universe_for  # noqa: E402
from eqlp.cli import SELECTIONS, SessionConfig  # noqa: E402
from eqlp.resolution import Limits, derive  # noqa: E402
from suite import SUITE  # noqa: E402


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--selection", choices=SELECTIONS, default="leftmost")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--universe-depth", type=int, default=3)
    ap.add_argument("--max-n", type=int, default=32)
    ap.add_argument("--max-depth", type=int, default=64)
    args = ap.parse_args(argv)

    cm = SessionConfig(selection=args.selection, seed=args.seed).method()
    refuted = 0
    print(f"{'program':<16}{'queries':>8}{'answers':>8}  verdicts")
    for sp in SUITE:
        prog = sp.program()
        counts = collections.Counter()
        t0 = time.perf_counter()
        queries = sp.parsed_queries()
        for q in queries:
            u = universe_for(prog, q, depth=args.universe_depth)
            lim = Limits(args.max_depth, sp.max_answers)
            for a in derive(prog, q, cm, lim):
                counts[check_correct_answer(prog, a.eq_formula, q, u, args.max_n).status] += 1
        refuted += counts["refuted"]
        print(f"{sp.name:<16}{len(queries):>8}{sum(counts.values()):>8}  "
              f"{dict(counts)}  ({time.perf_counter() - t0:.2f}s)")
    return 1 if refuted else 0


if __name__ == "__main__":
    sys.exit(main())
