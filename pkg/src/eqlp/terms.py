"""Abstract syntax: terms, atoms, positive queries, clauses and programs.

Every syntax object is an immutable, hashable dataclass.  Variables are plain
string identifiers; generated variables use the reserved prefix ``_G``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

RESERVED_PREFIX = "_G"


class CaptureError(ValueError):
    """A replacement term would be captured by an existential binder."""


class ArityError(ValueError):
    """A symbol is used with two different arities."""


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class App:
    functor: str
    args: tuple = ()

    def __str__(self) -> str:
        if not self.args:
            return self.functor
        return f"{self.functor}({', '.join(map(str, self.args))})"


Term = Union[Var, App]


def const(name: str) -> App:
    return App(name, ())


def term_vars(t: Term, acc: set | None = None) -> set:
    if acc is None:
        acc = set()
    stack = [t]
    while stack:
        s = stack.pop()
        if type(s) is Var:
            acc.add(s.name)
        else:
            stack.extend(s.args)
    return acc


def occurs(name: str, t: Term) -> bool:
    if type(t) is Var:
        return t.name == name
    return any(occurs(name, a) for a in t.args)


def is_ground(t: Term) -> bool:
    if type(t) is Var:
        return False
    return all(is_ground(a) for a in t.args)


def term_depth(t: Term) -> int:
    """Constants and variables have depth 0."""
    if type(t) is Var or not t.args:
        return 0
    return 1 + max(term_depth(a) for a in t.args)


def subst_term(t: Term, bindings: Mapping[str, Term]) -> Term:
    """Simultaneous replacement of variables in a term."""
    if type(t) is Var:
        return bindings.get(t.name, t)
    if not t.args:
        return t
    return App(t.functor, tuple(subst_term(a, bindings) for a in t.args))


# -- atoms and queries -------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __post_init__(self):
        if self.predicate == "=":
            raise ValueError("'=' is not a predicate symbol")

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({', '.join(map(str, self.args))})"


@dataclass(frozen=True, slots=True)
class Truth:
    pass


@dataclass(frozen=True, slots=True)
class Falsity:
    pass


@dataclass(frozen=True, slots=True)
class Eq:
    lhs: Term
    rhs: Term


@dataclass(frozen=True, slots=True)
class AtomQ:
    atom: Atom


@dataclass(frozen=True, slots=True)
class And:
    left: "Query"
    right: "Query"


@dataclass(frozen=True, slots=True)
class Exists:
    var: str
    body: "Query"


Query = Union[Truth, Falsity, Eq, AtomQ, And, Exists]

TRUE = Truth()
FALSE = Falsity()


def conj(parts: Iterable[Query]) -> Query:
    """Left-associated conjunction; the empty conjunction is TRUE."""
    result = None
    for p in parts:
        result = p if result is None else And(result, p)
    return TRUE if result is None else result


def exists(names: Iterable[str], body: Query) -> Query:
    for v in reversed(list(names)):
        body = Exists(v, body)
    return body


def conjuncts(q: Query) -> list:
    """Flatten a tree of And nodes into its leaves, left to right."""
    out = []
    stack = [q]
    while stack:
        n = stack.pop()
        if type(n) is And:
            stack.append(n.right)
            stack.append(n.left)
        else:
            out.append(n)
    return out


def free_vars(q: Query) -> set:
    t = type(q)
    if t is Eq:
        return term_vars(q.rhs, term_vars(q.lhs))
    if t is AtomQ:
        acc: set = set()
        for a in q.atom.args:
            term_vars(a, acc)
        return acc
    if t is And:
        return free_vars(q.left) | free_vars(q.right)
    if t is Exists:
        return free_vars(q.body) - {q.var}
    return set()


def all_vars(q: Query) -> set:
    """Free and bound variable names together."""
    t = type(q)
    if t is And:
        return all_vars(q.left) | all_vars(q.right)
    if t is Exists:
        return all_vars(q.body) | {q.var}
    return free_vars(q)


def atom_count(q: Query) -> int:
    t = type(q)
    if t is AtomQ:
        return 1
    if t is And:
        return atom_count(q.left) + atom_count(q.right)
    if t is Exists:
        return atom_count(q.body)
    return 0


def atoms_of(q: Query) -> list:
    """The atoms of ``q`` in left-to-right order (atom positions index this list)."""
    t = type(q)
    if t is AtomQ:
        return [q.atom]
    if t is And:
        return atoms_of(q.left) + atoms_of(q.right)
    if t is Exists:
        return atoms_of(q.body)
    return []


def subst_atom(a: Atom, bindings: Mapping[str, Term]) -> Atom:
    return Atom(a.predicate, tuple(subst_term(x, bindings) for x in a.args))


# -- fresh names -------------------------------------------------------------

class FreshNames:
    """Monotone source of ``_G<n>`` identifiers.

    Names listed in ``avoid`` are skipped, so a source can be started safely
    against syntax that already contains generated names.
    """

    def __init__(self, start: int = 0, avoid: Iterable[str] = ()):
        self.counter = start
        self.avoid = set(avoid)

    def __call__(self) -> str:
        while True:
            name = f"{RESERVED_PREFIX}{self.counter}"
            self.counter += 1
            if name not in self.avoid:
                return name

    def reserve(self, names: Iterable[str]) -> None:
        self.avoid.update(names)


def fresh_var(source: FreshNames) -> str:
    return source()


def _suffixed(base: str, taken: set) -> str:
    stem = base.rstrip("0123456789") or base
    i = 1
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


# -- replacement -------------------------------------------------------------

def replace_free(q: Query, bindings: Mapping[str, Term], *, rename: bool = True,
                 fresh: FreshNames | None = None) -> Query:
    """Replace every free occurrence of the bound keys simultaneously.

    When a binder would capture a variable of a replacement term it is
    renamed first (``rename=True``), either to a name from ``fresh`` or to
    the binder's name with the smallest unused numeric suffix.  With
    ``rename=False`` such a capture raises :class:`CaptureError`.
    """
    bindings = {k: v for k, v in bindings.items() if not (type(v) is Var and v.name == k)}
    if not bindings:
        return q
    return _replace(q, bindings, rename, fresh)


def _replace(q, bindings, rename, fresh):
    t = type(q)
    if t is Eq:
        return Eq(subst_term(q.lhs, bindings), subst_term(q.rhs, bindings))
    if t is AtomQ:
        return AtomQ(subst_atom(q.atom, bindings))
    if t is And:
        return And(_replace(q.left, bindings, rename, fresh),
                   _replace(q.right, bindings, rename, fresh))
    if t is Exists:
        body_free = free_vars(q.body)
        inner = {k: v for k, v in bindings.items() if k != q.var and k in body_free}
        if not inner:
            return q
        incoming: set = set()
        for v in inner.values():
            term_vars(v, incoming)
        var, body = q.var, q.body
        if var in incoming:
            if not rename:
                raise CaptureError(f"binder {var} captures a replacement variable")
            taken = incoming | body_free | all_vars(q.body) | set(inner)
            new = fresh() if fresh is not None else _suffixed(var, taken)
            body = _replace(body, {var: Var(new)}, rename, fresh)
            var = new
        return Exists(var, _replace(body, inner, rename, fresh))
    return q


# -- variants ----------------------------------------------------------------

def _canon(q: Query, env: dict, counter: list):
    t = type(q)
    if t is Eq:
        return ("=", subst_term(q.lhs, env), subst_term(q.rhs, env))
    if t is AtomQ:
        return ("atom", subst_atom(q.atom, env))
    if t is And:
        return ("and", _canon(q.left, env, counter), _canon(q.right, env, counter))
    if t is Exists:
        # '#' cannot occur in a parsed identifier, so bound slots never meet free names
        slot = f"#{counter[0]}"
        counter[0] += 1
        return ("exists", slot, _canon(q.body, {**env, q.var: Var(slot)}, counter))
    return ("true",) if t is Truth else ("false",)


def canonical_form(q: Query):
    """Structure of ``q`` with bound variables renumbered in binder order."""
    return _canon(q, {}, [0])


def is_variant(q1: Query, q2: Query) -> bool:
    return canonical_form(q1) == canonical_form(q2)


# -- clauses and programs ----------------------------------------------------

@dataclass(frozen=True, slots=True)
class Clause:
    head: Atom
    body: Query = TRUE

    def variables(self) -> list:
        """Free variables of the clause in order of first occurrence."""
        seen: dict = {}
        for a in self.head.args:
            _ordered_vars(a, seen)
        _ordered_query_vars(self.body, seen, frozenset())
        return list(seen)

    def __str__(self) -> str:
        from .parser import print_clause
        return print_clause(self)


def _ordered_vars(t: Term, seen: dict) -> None:
    if type(t) is Var:
        seen.setdefault(t.name, None)
    else:
        for a in t.args:
            _ordered_vars(a, seen)


def _ordered_query_vars(q: Query, seen: dict, bound: frozenset) -> None:
    t = type(q)
    if t is Eq:
        for side in (q.lhs, q.rhs):
            local: dict = {}
            _ordered_vars(side, local)
            for v in local:
                if v not in bound:
                    seen.setdefault(v, None)
    elif t is AtomQ:
        for a in q.atom.args:
            local = {}
            _ordered_vars(a, local)
            for v in local:
                if v not in bound:
                    seen.setdefault(v, None)
    elif t is And:
        _ordered_query_vars(q.left, seen, bound)
        _ordered_query_vars(q.right, seen, bound)
    elif t is Exists:
        _ordered_query_vars(q.body, seen, bound | {q.var})


def rename_clause(c: Clause, fresh: FreshNames) -> Clause:
    """Injectively rename every free variable of ``c`` to a fresh identifier."""
    mapping = {v: Var(fresh()) for v in c.variables()}
    if not mapping:
        return c
    head = subst_atom(c.head, mapping)
    return Clause(head, replace_free(c.body, mapping, fresh=fresh))


def clause_as_query(c: Clause) -> Query:
    """Universal closure body, with the arrow read as a conjunction (for variant tests)."""
    return And(AtomQ(c.head), c.body)


@dataclass
class Alphabet:
    """Symbol table: functors (constants are 0-ary) and predicates with arities."""
    functors: dict = field(default_factory=dict)
    predicates: dict = field(default_factory=dict)

    def declare_functor(self, name: str, arity: int) -> None:
        old = self.functors.setdefault(name, arity)
        if old != arity:
            raise ArityError(f"functor {name} used with arities {old} and {arity}")

    def declare_predicate(self, name: str, arity: int) -> None:
        old = self.predicates.setdefault(name, arity)
        if old != arity:
            raise ArityError(f"predicate {name} used with arities {old} and {arity}")

    def constants(self) -> list:
        return sorted(f for f, n in self.functors.items() if n == 0)

    def is_function_free(self) -> bool:
        return all(n == 0 for n in self.functors.values())

    def merged(self, other: "Alphabet") -> "Alphabet":
        out = Alphabet(dict(self.functors), dict(self.predicates))
        for f, n in other.functors.items():
            out.declare_functor(f, n)
        for p, n in other.predicates.items():
            out.declare_predicate(p, n)
        return out

    def add_term(self, t: Term) -> None:
        if type(t) is App:
            self.declare_functor(t.functor, len(t.args))
            for a in t.args:
                self.add_term(a)

    def add_query(self, q: Query) -> None:
        t = type(q)
        if t is Eq:
            self.add_term(q.lhs)
            self.add_term(q.rhs)
        elif t is AtomQ:
            self.declare_predicate(q.atom.predicate, len(q.atom.args))
            for a in q.atom.args:
                self.add_term(a)
        elif t is And:
            self.add_query(q.left)
            self.add_query(q.right)
        elif t is Exists:
            self.add_query(q.body)

    def ensure_constant(self) -> None:
        """Guarantee a nonempty Herbrand universe by adding a constant if needed."""
        if self.constants():
            return
        name = "a"
        i = 0
        while name in self.functors:
            i += 1
            name = f"a{i}"
        self.functors[name] = 0

    @classmethod
    def of(cls, *items) -> "Alphabet":
        alpha = cls()
        for it in items:
            if isinstance(it, Program):
                alpha = alpha.merged(it.alphabet)
            elif isinstance(it, Clause):
                alpha.add_query(AtomQ(it.head))
                alpha.add_query(it.body)
            else:
                alpha.add_query(it)
        alpha.ensure_constant()
        return alpha


@dataclass(frozen=True)
class Program:
    clauses: tuple
    alphabet: Alphabet

    @classmethod
    def from_clauses(cls, clauses: Iterable[Clause]) -> "Program":
        clauses = tuple(clauses)
        alpha = Alphabet()
        for c in clauses:
            alpha.add_query(AtomQ(c.head))
            alpha.add_query(c.body)
        alpha.ensure_constant()
        return cls(clauses, alpha)

    def matching(self, predicate: str, arity: int) -> list:
        """Indices of clauses whose head has the given predicate, in source order."""
        return [i for i, c in enumerate(self.clauses)
                if c.head.predicate == predicate and len(c.head.args) == arity]

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)
