"""Run the p/q example end to end: resolution, substitution view, oracle check."""
from __future__ import annotations

import argparse

from eqlp.fixpoint import check_correct_answer, universe_for
from eqlp.parser import parse_program, parse_query, print_query
from eqlp.cli import SELECTIONS, SessionConfig
from eqlp.resolution import derive
from eqlp.solver import to_query


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--selection", choices=SELECTIONS, default="leftmost")
    ap.add_argument("--universe-depth", type=int, default=2)
    args = ap.parse_args(argv)

    prog = parse_program("p(f(Z)).\nq(g(Z)).\n")
    q = parse_query("p(X), q(Y)")
    u = universe_for(prog, q, depth=args.universe_depth)
    for a in derive(prog, q, SessionConfig(selection=args.selection).method()):
        print("answer      ", print_query(to_query(a.eq_formula)))
        print("substitution", a.substitution)
        print("derivation  ", len(a.derivation) - 1, "steps")
        for node in a.derivation:
            print("    ", print_query(node.query))
        print("oracle      ", check_correct_answer(prog, a.eq_formula, q, u))


if __name__ == "__main__":
    main()
