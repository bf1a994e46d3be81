"""Test-program suite shared by the tests and the scripts.

Each entry has program text, queries, and a flag for the function-free
(Datalog) subset on which the fixpoint oracle is exact.  ``max_answers``
caps enumeration for queries with infinitely many answers.
"""
from __future__ import annotations

from dataclasses import dataclass

from eqlp.parser import parse_program, parse_query


@dataclass(frozen=True)
class SuiteProgram:
    name: str
    text: str
    queries: tuple
    datalog: bool = False
    max_answers: int = 6
    notes: str = ""

    def program(self):
        return parse_program(self.text, origin=self.name)

    def parsed_queries(self) -> list:
        return [parse_query(q) for q in self.queries]


PAPER_PQ = SuiteProgram(
    "paper_pq",
    """
    p(f(Z)).
    q(g(Z)).
    """,
    ("p(X), q(Y)", "p(X)", "q(Y)", "p(X), q(X)", "exists Y . (p(Y), X = Y)", "p(f(f(a)))"),
)

APPEND = SuiteProgram(
    "append",
    """
    app(nil, L, L).
    app(cons(H, T), L, cons(H, R)) :- app(T, L, R).
    """,
    ("app(X, Y, cons(a, cons(b, nil)))",
     "app(cons(a, nil), cons(b, nil), Z)",
     "app(X, cons(b, nil), Y)",
     "exists Y . (app(X, Y, cons(a, cons(b, nil))))",
     "app(X, X, cons(a, cons(a, nil)))"),
    max_answers=4,
)

PEANO = SuiteProgram(
    "peano_add",
    """
    add(zero, Y, Y).
    add(s(X), Y, s(Z)) :- add(X, Y, Z).
    """,
    ("add(s(zero), s(zero), Z)",
     "add(X, Y, s(s(zero)))",
     "add(X, s(zero), Z)",
     "exists Y . (add(X, Y, s(zero)), Y = s(W))"),
    max_answers=4,
)

GRAPH = SuiteProgram(
    "graph_reach",
    """
    % a six-node DAG
    edge(n1, n2). edge(n1, n3). edge(n2, n4).
    edge(n3, n4). edge(n4, n5). edge(n5, n6).
    path(X, Y) :- edge(X, Y).
    path(X, Y) :- edge(X, Z), path(Z, Y).
    """,
    ("path(n1, X)", "path(X, n6)", "path(X, Y)", "path(n6, X)",
     "exists Z . (path(n2, Z), path(Z, n6))", "path(X, n4), path(n4, Y)"),
    datalog=True,
    max_answers=64,
)

FAMILY = SuiteProgram(
    "family",
    """
    parent(ann, bob). parent(bob, cid). parent(bob, dee). parent(cid, eve).
    ancestor(X, Y) :- parent(X, Y).
    ancestor(X, Y) :- exists Z . (parent(X, Z), ancestor(Z, Y)).
    grandparent(X, Y) :- exists Z . (parent(X, Z), parent(Z, Y)).
    has_child(X) :- exists Y . (parent(X, Y)).
    sibling(X, Y) :- exists P . (parent(P, X), parent(P, Y)).
    """,
    ("ancestor(ann, X)", "grandparent(X, Y)", "has_child(X)", "sibling(cid, X)",
     "ancestor(X, eve), X = bob", "exists Y . (ancestor(X, Y), has_child(Y))"),
    datalog=True,
    max_answers=64,
)

EQUATIONAL_DATALOG = SuiteProgram(
    "colors",
    """
    color(red). color(green). color(blue).
    differ(red, green). differ(red, blue). differ(green, blue).
    differ(X, Y) :- differ(Y, X), X = X.
    same(X, Y) :- color(X), X = Y.
    pair(X, Y) :- color(X), color(Y), exists Z . (Z = X).
    """,
    ("differ(X, Y)", "same(X, Y)", "same(red, X)", "differ(red, X), differ(X, blue)",
     "exists Y . (pair(X, Y), same(Y, blue))", "color(X), X = Y"),
    datalog=True,
    max_answers=64,
)

EVEN = SuiteProgram(
    "even_odd",
    """
    even(zero).
    even(s(X)) :- odd(X).
    odd(s(X)) :- even(X).
    """,
    ("even(s(s(zero)))", "odd(X)", "even(X), X = s(Y)", "odd(s(s(zero)))"),
    max_answers=3,
)

MEMBER = SuiteProgram(
    "member",
    """
    member(X, cons(X, T)).
    member(X, cons(H, T)) :- member(X, T).
    """,
    ("member(X, cons(a, cons(b, nil)))", "member(b, L)",
     "exists L . (L = cons(a, cons(Y, nil)), member(b, L))"),
    max_answers=4,
)

PAIRS = SuiteProgram(
    "pairs",
    """
    swap(P, Q) :- exists A . exists B . (P = pair(A, B), Q = pair(B, A)).
    diag(P) :- exists A . (P = pair(A, A)).
    fst(pair(A, B), A).
    """,
    ("swap(pair(a, b), Q)", "swap(P, pair(a, X))", "diag(X), swap(X, Y)",
     "swap(X, X)", "fst(P, a), diag(P)"),
)

REVERSE = SuiteProgram(
    "reverse",
    """
    app(nil, L, L).
    app(cons(H, T), L, cons(H, R)) :- app(T, L, R).
    rev(nil, nil).
    rev(cons(H, T), R) :- exists RT . (rev(T, RT), app(RT, cons(H, nil), R)).
    """,
    ("rev(cons(a, cons(b, nil)), R)", "rev(cons(a, nil), cons(a, nil))", "rev(X, X)"),
    max_answers=3,
)

TREES = SuiteProgram(
    "trees",
    """
    tree(leaf).
    tree(node(L, R)) :- tree(L), tree(R).
    mirror(leaf, leaf).
    mirror(node(L, R), node(R2, L2)) :- mirror(L, L2), mirror(R, R2).
    """,
    ("mirror(node(leaf, node(leaf, leaf)), M)", "tree(T)", "mirror(T, T), T = node(X, Y)"),
    max_answers=4,
)

SUITE = (PAPER_PQ, APPEND, PEANO, GRAPH, FAMILY, EQUATIONAL_DATALOG, EVEN, MEMBER, PAIRS,
         REVERSE, TREES)
DATALOG = tuple(p for p in SUITE if p.datalog)
