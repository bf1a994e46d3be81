"""Finite substitutions and their correspondence with EQ-formulas.

A substitution is a finite map from a domain of variables to terms.  Range
variables live in their own name space: a range variable is a parameter
only when it is bound to itself (``y <- y``); every other range variable
behaves like an existentially quantified one.
"""
from __future__ import annotations

import enum
from typing import Iterable, Mapping

from .solver import (
    CONST_FALSE, CONST_TRUE, ConstFalse, ConstTrue, Shape, SolvedForm,
    is_atom_free, kernel_of, normalize, partition,
)
from .terms import Eq, FreshNames, Term, Var, conj, exists, subst_term, term_vars


class NotApplicable(ValueError):
    pass


class Substitution:
    __slots__ = ("_map",)

    def __init__(self, bindings: Mapping[str, Term] | Iterable = ()):
        self._map = dict(bindings)

    @property
    def bindings(self) -> dict:
        return dict(self._map)

    @property
    def domain(self) -> frozenset:
        return frozenset(self._map)

    def range_vars(self) -> set:
        acc: set = set()
        for t in self._map.values():
            term_vars(t, acc)
        return acc

    def items(self):
        return self._map.items()

    def __getitem__(self, name: str) -> Term:
        return self._map[name]

    def __contains__(self, name) -> bool:
        return name in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._map == other._map

    def __hash__(self) -> int:
        return hash(frozenset(self._map.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{x} <- {t}" for x, t in sorted(self._map.items()))
        return "{" + inner + "}"


class _Bottom:
    """The failure element, below every substitution."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"


BOTTOM = _Bottom()
EMPTY = Substitution()


class Order(enum.Enum):
    MORE_GENERAL = "more_general"
    LESS_GENERAL = "less_general"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


def apply_to_term(s: Substitution, t: Term) -> Term:
    if s is BOTTOM:
        raise NotApplicable("cannot apply BOTTOM")
    missing = term_vars(t) - s.domain
    if missing:
        raise NotApplicable(f"variables {sorted(missing)} are outside the domain")
    return subst_term(t, s._map)


def compose(s, t):
    """``s`` followed by ``t``: the substitution ``x -> s(x) t`` over ``dom(s)``."""
    if s is BOTTOM or t is BOTTOM:
        return BOTTOM
    missing = s.range_vars() - t.domain
    if missing:
        raise NotApplicable(f"range variables {sorted(missing)} are outside the domain")
    return Substitution({x: subst_term(v, t._map) for x, v in s.items()})


def restrict(s: Substitution, xs: Iterable[str]) -> Substitution:
    xs = set(xs)
    return Substitution({x: v for x, v in s.items() if x in xs})


def regular_extension(s: Substitution, xs: Iterable[str], fresh: FreshNames,
                      avoid: Iterable[str] = ()) -> Substitution:
    """Extend ``s`` over ``xs`` by mapping each new variable to a distinct fresh one."""
    xs = set(xs)
    if not s.domain <= xs:
        raise ValueError("domain must be contained in the extension set")
    blocked = s.range_vars() | set(avoid)
    out = dict(s._map)
    for x in sorted(xs - s.domain):
        v = fresh()
        while v in blocked:
            v = fresh()
        blocked.add(v)
        out[x] = Var(v)
    return Substitution(out)


def match(pattern: Term, target: Term, tau: dict) -> bool:
    """Extend ``tau`` so that ``pattern tau == target``; syntactic one-way matching."""
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if type(p) is Var:
            bound = tau.get(p.name)
            if bound is None:
                tau[p.name] = t
            elif bound != t:
                return False
        elif type(t) is Var or p.functor != t.functor or len(p.args) != len(t.args):
            return False
        else:
            stack.extend(zip(p.args, t.args))
    return True


def leq(s, t) -> bool:
    """``s`` is an instance of ``t`` (``t`` is more general)."""
    if s is BOTTOM:
        return True
    if t is BOTTOM:
        return False
    dom = s.domain | t.domain
    avoid = s.range_vars() | t.range_vars() | dom
    fresh = FreshNames(avoid=avoid)
    s2 = regular_extension(s, dom, fresh, avoid)
    t2 = regular_extension(t, dom, fresh, avoid)
    tau: dict = {}
    return all(match(t2[x], s2[x], tau) for x in sorted(dom))


def compare(s, t) -> Order:
    """Relation of ``s`` to ``t`` in the generality preorder."""
    down = leq(s, t)
    up = leq(t, s)
    if down and up:
        return Order.EQUIVALENT
    if up:
        return Order.MORE_GENERAL
    if down:
        return Order.LESS_GENERAL
    return Order.INCOMPARABLE


def equivalent(s, t) -> bool:
    return compare(s, t) is Order.EQUIVALENT


# -- correspondence with EQ-formulas -----------------------------------------

def to_eq_formula(s, fresh: FreshNames | None = None) -> SolvedForm:
    if s is BOTTOM:
        return CONST_FALSE
    params = {x for x, v in s.items() if type(v) is Var and v.name == x}
    range_vars = s.range_vars()
    quantified = sorted(range_vars - params)
    taken = set(s.domain) | range_vars
    if fresh is None:
        fresh = FreshNames(avoid=taken)
    rename = {}
    for z in quantified:
        if z in s.domain:
            # a range variable that is also a non-identity domain key is a
            # different variable; move it out of the way
            new = fresh()
            while new in taken:
                new = fresh()
            taken.add(new)
            rename[z] = Var(new)
    names = [rename[z].name if z in rename else z for z in quantified]
    eqs = [Eq(Var(x), subst_term(v, rename)) for x, v in sorted(s.items()) if x not in params]
    return normalize(exists(names, conj(eqs)), fresh)


def from_solved_form(e: SolvedForm) -> Substitution | _Bottom:
    if type(e) is ConstFalse:
        return BOTTOM
    if type(e) is ConstTrue:
        return EMPTY
    if not is_atom_free(e):
        raise ValueError("only atom-free solved forms correspond to substitutions")
    out = {x: v for x, v in e.bindings}
    for y in sorted(partition(e).param):
        out[y] = Var(y)
    return Substitution(out)


def kernel_of_subst(s: Substitution) -> frozenset:
    if s is BOTTOM:
        raise ValueError("BOTTOM has no kernel")
    return kernel_of(to_eq_formula(s))


def show(s) -> str:
    """User-facing rendering: identity bindings are suppressed."""
    if s is BOTTOM:
        return "no"
    parts = [f"{x} <- {v}" for x, v in s.items() if not (type(v) is Var and v.name == x)]
    return "{" + ", ".join(parts) + "}"
