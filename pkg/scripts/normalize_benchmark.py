"""Time the solved-form normalizer on random queries and cross-check it
against brute-force ground solutions over a finite universe."""
from __future__ import annotations

import argparse
import pathlib
import random
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from eqlp.solver import is_solved_form, normalize, to_query  # noqa: E402
from eqlp.terms import atom_count, free_vars  # noqa: E402
from oracles import ground_solutions, random_interpretation, random_query, universe  # noqa: E402

FUNCTORS = {"a": 0, "f": 1, "g": 2}
PREDICATES = {"p": 1, "q": 2}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--depth", type=int, default=2, help="universe depth for the check")
    ap.add_argument("--interpretations", type=int, default=10)
    ap.add_argument("--no-check", action="store_true", help="only time normalization")
    args = ap.parse_args(argv)

    rng = random.Random(args.seed)
    terms = universe(FUNCTORS, args.depth)
    interps = [random_interpretation(rng, PREDICATES, terms) for _ in range(args.interpretations)]
    queries = [random_query(rng, FUNCTORS, PREDICATES) for _ in range(args.n)]

    t0 = time.perf_counter()
    outs = [normalize(q) for q in queries]
    t_norm = time.perf_counter() - t0
    print(f"normalized {args.n} queries in {t_norm:.2f}s ({1e6 * t_norm / args.n:.0f} us/query)")
    if args.no_check:
        return 0

    bad = 0
    for q, e in zip(queries, outs):
        out = to_query(e)
        vs = sorted(free_vars(q))
        pool = interps if atom_count(q) else [frozenset()]
        same = all(ground_solutions(q, i, terms, args.depth, vs) ==
                   ground_solutions(out, i, terms, args.depth, vs) for i in pool)
        if not (same and is_solved_form(out)):
            bad += 1
    print(f"checked: {bad} mismatches")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
