"""Command-line front end and REPL.

    eqlp --program append.lp --query "app(X, Y, cons(a, nil))"
    eqlp --program graph.lp            # interactive: ?- path(a, X).

Exit status: 0 when at least one answer was printed, 1 when there were
none, 2 on a diagnostic (parse error, unreadable file, bad flag).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Iterator, TextIO

from .fixpoint import check_correct_answer, universe_for
from .parser import ParseError, load_program, parse_query, print_query
from .resolution import ALL_ATOMS, LEFTMOST, Answer, Limits, derive, seeded_random
from .solver import ConstFalse, ConstTrue, kernel_of, partition, to_query
from .terms import Alphabet, Program, Var, free_vars, subst_term

SELECTIONS = ("leftmost", "all", "random")


@dataclass
class SessionConfig:
    program_paths: list = field(default_factory=list)
    selection: str = "leftmost"
    max_depth: int = 64
    max_answers: int = 10
    verify: bool = False
    universe_depth: int = 3
    output: str = "text"
    trace: bool = False
    seed: int | None = None
    max_n: int = 32

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.max_answers < 1:
            raise ValueError("max_answers must be at least 1")
        if self.universe_depth < 0:
            raise ValueError("universe_depth must be nonnegative")
        if self.selection not in SELECTIONS:
            raise ValueError(f"unknown selection {self.selection!r}")
        if self.output not in ("text", "json"):
            raise ValueError(f"unknown output {self.output!r}")

    def method(self):
        if self.selection == "all":
            return ALL_ATOMS
        if self.selection == "random":
            return seeded_random(self.seed or 0)
        return LEFTMOST


# -- rendering -----------------------------------------------------------------

@dataclass(frozen=True)
class Rendered:
    eq_formula: str
    bindings: tuple  # (var, term string) pairs
    parameters: tuple
    bound: tuple
    kernel: tuple


def render(answer: Answer) -> Rendered:
    """Display form: bound variables become Z1, Z2, ... avoiding free names."""
    e = answer.eq_formula
    if type(e) is ConstTrue:
        return Rendered("true", (), (), (), ())
    if type(e) is ConstFalse:
        return Rendered("false", (), (), (), ())
    taken = set(free_vars(to_query(e))) | set(answer.query_vars)
    names: dict = {}
    i = 1
    for z in e.bound:
        while f"Z{i}" in taken:
            i += 1
        names[z] = Var(f"Z{i}")
        taken.add(f"Z{i}")
    e2 = type(e)(tuple(names[z].name for z in e.bound),
                 tuple((x, subst_term(s, names)) for x, s in e.bindings), e.atoms)
    p = partition(e2)
    return Rendered(print_query(to_query(e2)),
                    tuple((x, str(s)) for x, s in e2.bindings),
                    tuple(sorted(p.param)), e2.bound, tuple(sorted(kernel_of(e2))))


def substitution_line(r: Rendered) -> str:
    if not r.bindings:
        return "{}"
    text = ", ".join(f"{x} = {s}" for x, s in r.bindings)
    if r.bound:
        text += f"   (fresh: {', '.join(r.bound)})"
    return text


def emit_json(answers, verdicts=None) -> str:
    lines = []
    for k, a in enumerate(answers):
        r = render(a)
        obj = {
            "eq_formula": r.eq_formula,
            "bindings": dict(r.bindings),
            "parameters": list(r.parameters),
            "bound": list(r.bound),
            "kernel": list(r.kernel),
        }
        if verdicts is not None and verdicts[k] is not None:
            obj["verdict"] = str(verdicts[k])
        lines.append(json.dumps(obj, separators=(",", ":")))
    return "".join(line + "\n" for line in lines)


def format_trace(answer: Answer) -> list:
    out = []
    for node in answer.derivation:
        head = f"  [{node.depth}]"
        if node.depth:
            head += f" atoms {list(node.positions)} clauses {list(node.clause_choices)}"
            rules = " ".join(str(st.rule_id) for st in node.trace)
            if rules:
                head += f" rules {rules}"
        out.append(f"{head}: {print_query(node.query)}")
    return out


# -- sessions --------------------------------------------------------------------

class Session:
    def __init__(self, config: SessionConfig, out: TextIO, err: TextIO):
        self.config = config
        self.out = out
        self.err = err
        self.paths = list(config.program_paths)
        self.program = load_program(*self.paths) if self.paths else Program((), Alphabet())

    def load(self, path: str) -> None:
        paths = self.paths + [path]
        self.program = load_program(*paths)
        self.paths = paths

    def answers(self, q) -> Iterator[Answer]:
        cfg = self.config
        return derive(self.program, q, cfg.method(),
                      Limits(cfg.max_depth, cfg.max_answers), trace=cfg.trace)

    def verdict(self, q, a: Answer):
        if not self.config.verify:
            return None
        u = universe_for(self.program, q, depth=self.config.universe_depth)
        return check_correct_answer(self.program, a.eq_formula, q, u, self.config.max_n)

    def show(self, q, a: Answer) -> None:
        v = self.verdict(q, a)
        if self.config.output == "json":
            self.out.write(emit_json([a], [v]))
            return
        r = render(a)
        self.out.write(r.eq_formula + "\n")
        self.out.write("  substitution: " + substitution_line(r) + "\n")
        if v is not None:
            self.out.write(f"  verified: {v}\n")
        if self.config.trace:
            for line in format_trace(a):
                self.out.write(line + "\n")


def run(config: SessionConfig, query_text: str | None = None,
        stdin: TextIO | None = None, stdout: TextIO | None = None,
        stderr: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    err = stderr or sys.stderr
    try:
        session = Session(config, out, err)
    except ParseError as e:
        err.write(f"{e}\n")
        return 2
    except OSError as e:
        err.write(f"cannot read program: {e}\n")
        return 2
    if query_text is not None:
        try:
            q = parse_query(query_text)
        except ParseError as e:
            err.write(f"{e}\n")
            return 2
        count = 0
        for a in session.answers(q):
            session.show(q, a)
            count += 1
        if not count:
            if config.output == "text":
                out.write("no\n")
            return 1
        return 0
    return repl(session, stdin or sys.stdin)


def repl(session: Session, stdin: TextIO) -> int:
    out = session.out
    interactive = stdin.isatty()
    lines = iter(stdin)

    def prompt(text):
        if interactive:
            out.write(text)
            out.flush()
        return next(lines, None)

    while True:
        line = prompt("?- ")
        if line is None:
            return 0
        line = line.strip()
        if not line:
            continue
        if line in (":quit", ":q", "halt."):
            return 0
        if line.startswith(":load"):
            path = line[5:].strip()
            try:
                session.load(path)
                out.write(f"loaded {path}\n")
            except (ParseError, OSError) as e:
                session.err.write(f"{e}\n")
            continue
        if line.startswith(":verify"):
            arg = line[7:].strip()
            if arg not in ("on", "off"):
                session.err.write("usage: :verify on|off\n")
            else:
                session.config.verify = arg == "on"
                out.write(f"verify {arg}\n")
            continue
        if line.startswith(":"):
            session.err.write(f"unknown command {line.split()[0]}\n")
            continue
        try:
            q = parse_query(line)
        except ParseError as e:
            session.err.write(f"{e}\n")
            continue
        shown = 0
        for a in session.answers(q):
            if shown:
                reply = prompt("")
                if reply is None or reply.strip() != ";":
                    break
            session.show(q, a)
            shown += 1
        else:
            out.write("no\n" if not shown else "no more answers\n")


# -- entry point -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="eqlp", description="Logic programs with equations "
                                "and existential queries; answers are solved EQ-formulas.")
    p.add_argument("--program", action="append", default=[], metavar="FILE",
                   help="program file (repeatable, concatenated in order)")
    p.add_argument("--query", help="run one query and exit; without it a REPL starts")
    p.add_argument("--selection", choices=SELECTIONS, default="leftmost")
    p.add_argument("--seed", type=int, default=None, help="seed for --selection random")
    p.add_argument("--max-depth", type=int, default=64)
    p.add_argument("--max-answers", type=int, default=10)
    p.add_argument("--universe-depth", type=int, default=3)
    p.add_argument("--verify", action="store_true", help="check answers with the fixpoint oracle")
    p.add_argument("--json", action="store_true", help="newline-delimited JSON output")
    p.add_argument("--trace", action="store_true", help="print the derivation of each answer")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = SessionConfig(
            program_paths=args.program, selection=args.selection, max_depth=args.max_depth,
            max_answers=args.max_answers, verify=args.verify,
            universe_depth=args.universe_depth, output="json" if args.json else "text",
            trace=args.trace, seed=args.seed)
    except ValueError as e:
        print(f"eqlp: {e}", file=sys.stderr)
        return 2
    return run(config, args.query)


if __name__ == "__main__":
    sys.exit(main())
