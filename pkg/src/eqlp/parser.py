"""Concrete syntax for programs and queries, plus a round-tripping printer.

Grammar::

    program  := clause*
    clause   := atom '.' | atom ':-' body '.'
    body     := primary (',' primary)*
    primary  := 'true' | 'false' | term '=' term | atom
              | 'exists' VAR '.' scope | '(' body ')'
    scope    := '(' body ')' | 'exists' VAR '.' scope

Variables start with an uppercase letter or underscore, symbols with a
lowercase letter or a digit.  ``%`` starts a line comment.  Conjunction is
left-associative.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .terms import (
    RESERVED_PREFIX, Alphabet, And, App, ArityError, Atom, AtomQ, Clause, Eq,
    Exists, Falsity, Program, Query, Truth, Var, FALSE, TRUE,
)

KINDS = ("syntax", "arity-conflict", "reserved-name")


@dataclass(frozen=True)
class Diagnostic:
    message: str
    line: int
    column: int
    kind: str = "syntax"

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.kind} error: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostic: Diagnostic, origin: str = "<input>"):
        super().__init__(f"{origin}:{diagnostic}")
        self.diagnostic = diagnostic
        self.origin = origin


@dataclass(frozen=True)
class SourceProgram:
    text: str
    origin: str = "<input>"


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<query>\?-)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<sym>[a-z][A-Za-z0-9_]*|[0-9]+)
  | (?P<punct>[(),.=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(Diagnostic(f"unexpected character {text[pos]!r}", line, col))
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet | None = None):
        self.tokens = tokenize(text)
        self.i = 0
        self.alphabet = alphabet if alphabet is not None else Alphabet()
        self.anon = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def error(self, message: str, tok: Token | None = None, kind: str = "syntax"):
        tok = tok or self.tok
        raise ParseError(Diagnostic(message, tok.line, tok.column, kind))

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("punct", "neck", "query") and t.text == text

    def at_keyword(self, word: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == word

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        t = self.tok
        self.i += 1
        return t

    # terms
    def variable(self) -> str:
        t = self.tok
        if t.kind != "var":
            self.error(f"expected a variable, found {t.text or 'end of input'!r}")
        self.i += 1
        if t.text.startswith(RESERVED_PREFIX):
            self.error(f"identifier {t.text} uses the reserved prefix {RESERVED_PREFIX}",
                       t, "reserved-name")
        if t.text == "_":
            self.anon += 1
            return f"_{self.anon}"
        return t.text

    def term(self, declare: bool = True):
        """Parse a term; ``declare=False`` leaves the outermost symbol undeclared."""
        t = self.tok
        if t.kind == "var":
            return Var(self.variable())
        if t.kind != "sym":
            self.error(f"expected a term, found {t.text or 'end of input'!r}")
        self.i += 1
        args = ()
        if self.at("("):
            self.i += 1
            items = [self.term()]
            while self.at(","):
                self.i += 1
                items.append(self.term())
            self.expect(")")
            args = tuple(items)
        if declare:
            self.declare(t, len(args), functor=True)
        return App(t.text, args)

    def declare(self, tok: Token, arity: int, functor: bool) -> None:
        try:
            if functor:
                self.alphabet.declare_functor(tok.text, arity)
            else:
                self.alphabet.declare_predicate(tok.text, arity)
        except ArityError as e:
            self.error(str(e), tok, "arity-conflict")

    def atom_from(self, term, tok: Token) -> Atom:
        if type(term) is Var:
            self.error("a variable cannot stand as an atom", tok)
        self.declare(tok, len(term.args), functor=False)
        return Atom(term.functor, term.args)

    # bodies
    def body(self) -> Query:
        q = self.primary()
        while self.at(","):
            self.i += 1
            q = And(q, self.primary())
        return q

    def primary(self) -> Query:
        t = self.tok
        if self.at("("):
            self.i += 1
            q = self.body()
            self.expect(")")
            return q
        if t.kind == "sym" and t.text in ("true", "false") and not self._next_is("(", "="):
            self.i += 1
            return TRUE if t.text == "true" else FALSE
        if t.kind == "sym" and t.text == "exists" and self.tokens[self.i + 1].kind == "var":
            return self.quantified()
        lhs = self.term(declare=False)
        if self.at("="):
            self.i += 1
            if type(lhs) is App:
                self.declare(t, len(lhs.args), functor=True)
            return Eq(lhs, self.term())
        return AtomQ(self.atom_from(lhs, t))

    def quantified(self) -> Query:
        self.i += 1  # 'exists'
        var = self.variable()
        self.expect(".")
        if self.at_keyword("exists") and self.tokens[self.i + 1].kind == "var":
            return Exists(var, self.quantified())
        self.expect("(")
        q = self.body()
        self.expect(")")
        return Exists(var, q)

    def _next_is(self, *texts) -> bool:
        nxt = self.tokens[self.i + 1]
        return nxt.kind == "punct" and nxt.text in texts

    def clause(self) -> Clause:
        t = self.tok
        head = self.atom_from(self.term(declare=False), t)
        body: Query = TRUE
        if self.at(":-"):
            self.i += 1
            body = self.body()
        self.expect(".")
        return Clause(head, body)


def parse_program(src, origin: str | None = None) -> Program:
    """Parse program text (or a :class:`SourceProgram`) into a :class:`Program`."""
    clauses, alpha = _parse_clauses(src, origin)
    alpha.ensure_constant()
    return Program(tuple(clauses), alpha)


def _parse_clauses(src, origin):
    if isinstance(src, SourceProgram):
        text, origin = src.text, origin or src.origin
    else:
        text = src
    origin = origin or "<input>"
    try:
        p = _Parser(text)
        clauses = []
        while p.tok.kind != "eof":
            p.anon = 0
            clauses.append(p.clause())
    except ParseError as e:
        raise ParseError(e.diagnostic, origin) from None
    return clauses, p.alphabet


def load_program(*paths) -> Program:
    """Parse and concatenate program files in the given order."""
    clauses: list = []
    alpha = Alphabet()
    for path in paths:
        more, more_alpha = _parse_clauses(
            SourceProgram(Path(path).read_text(encoding="utf-8"), str(path)), None)
        clauses.extend(more)
        try:
            alpha = alpha.merged(more_alpha)
        except ArityError as e:
            raise ParseError(Diagnostic(str(e), 1, 1, "arity-conflict"), str(path)) from None
    alpha.ensure_constant()
    return Program(tuple(clauses), alpha)


def parse_query(text: str) -> Query:
    p = _Parser(text)
    if p.at("?-"):
        p.i += 1
    q = p.body()
    if p.at("."):
        p.i += 1
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after query")
    return q


def parse_term(text: str):
    p = _Parser(text)
    t = p.term()
    if p.tok.kind != "eof":
        p.error(f"unexpected {p.tok.text!r} after term")
    return t


# -- printing ----------------------------------------------------------------

def print_term(t) -> str:
    return str(t)


def print_query(q: Query) -> str:
    t = type(q)
    if t is Truth:
        return "true"
    if t is Falsity:
        return "false"
    if t is Eq:
        return f"{q.lhs} = {q.rhs}"
    if t is AtomQ:
        return str(q.atom)
    if t is And:
        right = print_query(q.right)
        if type(q.right) is And:
            right = f"({right})"
        return f"{print_query(q.left)}, {right}"
    if t is Exists:
        if type(q.body) is Exists:
            return f"exists {q.var} . {print_query(q.body)}"
        return f"exists {q.var} . ({print_query(q.body)})"
    raise TypeError(f"not a query: {q!r}")


def print_clause(c: Clause) -> str:
    if type(c.body) is Truth:
        return f"{c.head}."
    return f"{c.head} :- {print_query(c.body)}."


def print_program(p: Program) -> str:
    return "\n".join(print_clause(c) for c in p.clauses) + "\n"
