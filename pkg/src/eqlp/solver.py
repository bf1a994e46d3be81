"""Solved Form Algorithm: equation solving over queries with atoms and binders.

Two entry points share the same rule set:

* :func:`applicable_steps` enumerates every single-step successor of a query
  under the twelve elementary rules (used to explore the nondeterminism);
* :func:`normalize` is a deterministic, total strategy built from the same
  rules, returning a :class:`Shape` or one of the two constants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

from .terms import (
    And, App, Atom, AtomQ, Eq, Exists, Falsity, FreshNames, Query, Truth, Var,
    FALSE, TRUE, all_vars, conj, conjuncts, exists, free_vars, occurs,
    replace_free, subst_atom, subst_term, term_vars,
)


class InconsistentAnswer(ValueError):
    pass


# -- solved forms ------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class ConstTrue:
    pass


@dataclass(frozen=True, slots=True)
class ConstFalse:
    pass


@dataclass(frozen=True, slots=True)
class Shape:
    """``(exists bound)(x1 = s1, ..., xn = sn, A1, ..., Am)``."""
    bound: tuple = ()
    bindings: tuple = ()
    atoms: tuple = ()


SolvedForm = Union[ConstTrue, ConstFalse, Shape]
CONST_TRUE = ConstTrue()
CONST_FALSE = ConstFalse()


@dataclass(frozen=True)
class VarPartition:
    elim: frozenset
    param: frozenset
    bound: frozenset


@dataclass(frozen=True)
class StepTrace:
    """One rule application; ``before``/``after`` are the rewritten redex."""
    rule_id: int
    before: Query
    after: Query


def to_query(e: SolvedForm) -> Query:
    if type(e) is ConstTrue:
        return TRUE
    if type(e) is ConstFalse:
        return FALSE
    body = conj([Eq(Var(x), s) for x, s in e.bindings] + [AtomQ(a) for a in e.atoms])
    return exists(e.bound, body)


def partition(e: SolvedForm) -> VarPartition:
    if type(e) is not Shape:
        return VarPartition(frozenset(), frozenset(), frozenset())
    elim = frozenset(x for x, _ in e.bindings)
    free = free_vars(to_query(e))
    return VarPartition(elim, frozenset(free - elim), frozenset(e.bound))


def is_consistent_form(e: SolvedForm) -> bool:
    return type(e) is not ConstFalse


def kernel_of(e: SolvedForm) -> frozenset:
    if type(e) is ConstFalse:
        raise InconsistentAnswer("FALSE has no kernel")
    if type(e) is ConstTrue:
        return frozenset()
    p = partition(e)
    return p.elim | p.param


def is_atom_free(e: SolvedForm) -> bool:
    return type(e) is not Shape or not e.atoms


# -- solved-form recognition --------------------------------------------------

def is_solved_form(q: Query) -> bool:
    if type(q) in (Truth, Falsity):
        return True
    prefix = []
    while type(q) is Exists:
        prefix.append(q.var)
        q = q.body
    leaves = conjuncts(q)
    elim: list = []
    rhs_vars: set = set()
    atom_vars: set = set()
    seen_atom = False
    for leaf in leaves:
        if type(leaf) is Eq:
            if seen_atom or type(leaf.lhs) is not Var:
                return False
            elim.append(leaf.lhs.name)
            if type(leaf.rhs) is Var and leaf.rhs.name in prefix:
                return False  # (iv)
            term_vars(leaf.rhs, rhs_vars)
        elif type(leaf) is AtomQ:
            seen_atom = True
            for a in leaf.atom.args:
                term_vars(a, atom_vars)
        else:
            return False
    names = elim + prefix
    if len(set(names)) != len(names):
        return False  # (i)
    if set(elim) & (rhs_vars | atom_vars):
        return False  # (ii)
    matrix_vars = rhs_vars | atom_vars | set(elim)
    return all(z in matrix_vars for z in prefix)  # (iii)


def as_solved_form(q: Query) -> SolvedForm:
    """Read a query that :func:`is_solved_form` accepts as a :class:`Shape`."""
    if not is_solved_form(q):
        raise ValueError("query is not in solved form")
    if type(q) is Truth:
        return CONST_TRUE
    if type(q) is Falsity:
        return CONST_FALSE
    prefix = []
    while type(q) is Exists:
        prefix.append(q.var)
        q = q.body
    leaves = conjuncts(q)
    bindings = tuple((l.lhs.name, l.rhs) for l in leaves if type(l) is Eq)
    atoms = tuple(l.atom for l in leaves if type(l) is AtomQ)
    return Shape(tuple(prefix), bindings, atoms)


# -- deterministic normalizer ------------------------------------------------

class _Clash(Exception):
    pass


def _subst_item(item, b):
    if type(item) is Eq:
        return Eq(subst_term(item.lhs, b), subst_term(item.rhs, b))
    return subst_atom(item, b)


def _item_vars(item, acc=None):
    if acc is None:
        acc = set()
    if type(item) is Eq:
        term_vars(item.lhs, acc)
        term_vars(item.rhs, acc)
    else:
        for a in item.args:
            term_vars(a, acc)
    return acc


def _item_has(item, name):
    if type(item) is Eq:
        return occurs(name, item.lhs) or occurs(name, item.rhs)
    return any(occurs(name, a) for a in item.args)


def _as_query(prefix, items):
    return exists(prefix, conj([it if type(it) in (Eq, Truth, Falsity) else AtomQ(it)
                                for it in items]))


class _Hoister:
    """Phase (i): pull every binder to the front (rules 8, 9, 11, 12)."""

    def __init__(self, q: Query, fresh: FreshNames, trace):
        self.taken = set(free_vars(q))
        self.everything = all_vars(q)
        self.fresh = fresh
        self.trace = trace

    def name_for(self, v: str) -> str:
        if v not in self.taken:
            self.taken.add(v)
            return v
        while True:
            n = self.fresh()
            if n not in self.taken and n not in self.everything:
                self.taken.add(n)
                return n

    def run(self, q, env=None):
        """Return ``(prefix, items)`` where items are Eq or Atom values.

        Binders are renamed top-down, so every prefix variable is distinct
        from every other binder and from the free variables of the query.
        """
        env = env or {}
        t = type(q)
        if t is Eq:
            return [], [Eq(subst_term(q.lhs, env), subst_term(q.rhs, env)) if env else q]
        if t is AtomQ:
            return [], [subst_atom(q.atom, env) if env else q.atom]
        if t is Truth:
            return [], []
        if t is Falsity:
            raise _Clash
        if t is And:
            p1, i1 = self.run(q.left, env)
            p2, i2 = self.run(q.right, env)
            if self.trace is not None:
                self._record_and(q, p1, i1, p2, i2)
            return p1 + p2, i1 + i2
        # Exists
        if q.var not in free_vars(q.body):
            p, items = self.run(q.body, env)
            if self.trace is not None:
                inner = _as_query(p, items)
                self.trace.append(StepTrace(8, Exists(q.var, inner), inner))
            return p, items
        name = self.name_for(q.var)
        if name != q.var or q.var in env:
            env = {**env, q.var: Var(name)}
        p, items = self.run(q.body, env)
        return [name] + p, items

    def _record_and(self, q, p1, i1, p2, i2):
        left, right = _as_query(p1, i1), _as_query(p2, i2)
        merged = _as_query(p1 + p2, i1 + i2)
        if p1 or p2:
            self.trace.append(StepTrace(9, And(left, right), merged))
        elif not i1 or not i2:
            self.trace.append(StepTrace(11, And(left, right), merged))


def normalize(q, fresh: FreshNames | None = None, trace: list | None = None) -> SolvedForm:
    """Rewrite ``q`` to an equivalent solved form (``CONST_FALSE`` if inconsistent).

    Strategy: hoist all binders into one prefix, then repeatedly rewrite the
    leftmost unsolved equation with the first applicable rule among 1-7,
    finally put equations before atoms and drop unused binders.  Choices
    depend only on positions, never on variable names, so variant inputs
    give variant outputs.
    """
    if isinstance(q, (ConstTrue, ConstFalse, Shape)):
        q = to_query(q)
    if fresh is None:
        fresh = FreshNames(avoid=all_vars(q))
    hoister = _Hoister(q, fresh, trace)
    try:
        prefix, items = hoister.run(q)
    except _Clash:
        if trace is not None and type(q) is not Falsity:
            trace.append(StepTrace(12, q, FALSE))
        return CONST_FALSE
    try:
        prefix, items = _solve(prefix, items, trace)
    except _Clash:
        return CONST_FALSE
    eqs = [it for it in items if type(it) is Eq]
    atoms = [it for it in items if type(it) is not Eq]
    if trace is not None and items != eqs + atoms:
        trace.append(StepTrace(10, _as_query(prefix, items), _as_query(prefix, eqs + atoms)))
    used: set = set()
    for it in items:
        _item_vars(it, used)
    for z in [z for z in prefix if z not in used]:
        kept = [y for y in prefix if y != z]
        if trace is not None:
            trace.append(StepTrace(8, _as_query(prefix, eqs + atoms), _as_query(kept, eqs + atoms)))
        prefix = kept
    if not eqs and not atoms:
        return CONST_TRUE
    return Shape(tuple(prefix), tuple((e.lhs.name, e.rhs) for e in eqs), tuple(atoms))


def _solve(prefix, items, trace):
    bound = set(prefix)
    prefix = list(prefix)
    items = list(items)
    i = 0
    while i < len(items):
        it = items[i]
        if type(it) is not Eq:
            i += 1
            continue
        s, t = it.lhs, it.rhs
        before = _as_query(prefix, items) if trace is not None else None
        if type(s) is App and type(t) is App:
            if s.functor != t.functor or len(s.args) != len(t.args):
                if trace is not None:
                    trace.append(StepTrace(2, it, FALSE))
                    trace.append(StepTrace(12, _as_query(prefix, items[:i] + [FALSE] + items[i + 1:]),
                                           FALSE))
                raise _Clash
            items[i:i + 1] = [Eq(a, b) for a, b in zip(s.args, t.args)]
            if trace is not None:
                trace.append(StepTrace(1, it, conj(items[i:i + len(s.args)])))
                if not s.args:
                    trace.append(StepTrace(11, _as_query(prefix, items[:i] + [TRUE] + items[i:]),
                                           _as_query(prefix, items)))
            continue
        if type(s) is App:
            items[i] = Eq(t, s)
            if trace is not None:
                trace.append(StepTrace(7, it, items[i]))
            continue
        x = s.name
        if type(t) is Var and t.name == x:
            del items[i]
            if trace is not None:
                trace.append(StepTrace(4, it, TRUE))
                trace.append(StepTrace(11, _as_query(prefix, items[:i] + [TRUE] + items[i:]),
                                       _as_query(prefix, items)))
            continue
        if occurs(x, t):
            if trace is not None:
                trace.append(StepTrace(3, it, FALSE))
                trace.append(StepTrace(12, _as_query(prefix, items[:i] + [FALSE] + items[i + 1:]),
                                       FALSE))
            raise _Clash
        if x in bound:
            b = {x: t}
            items = [TRUE if j == i else _subst_item(other, b) for j, other in enumerate(items)]
            if trace is not None:
                after = _as_query(prefix, items)
                trace.append(StepTrace(6, before, after))
            del items[i]
            if trace is not None:
                before = _as_query(prefix, items)
                if before != after:
                    trace.append(StepTrace(11, after, before))
            prefix.remove(x)
            bound.discard(x)
            if trace is not None:
                trace.append(StepTrace(8, before, _as_query(prefix, items)))
            continue
        if type(t) is Var and t.name in bound:
            items[i] = Eq(t, s)
            if trace is not None:
                trace.append(StepTrace(7, before, _as_query(prefix, items)))
            continue
        if any(_item_has(other, x) for j, other in enumerate(items) if j != i):
            b = {x: t}
            items = [other if j == i else _subst_item(other, b) for j, other in enumerate(items)]
            if trace is not None:
                trace.append(StepTrace(5, before, _as_query(prefix, items)))
        i += 1
    return prefix, items


def is_consistent(q: Query) -> bool:
    return type(normalize(q)) is not ConstFalse


# -- comparison of solved forms ----------------------------------------------

def canonical_solved(e: SolvedForm):
    """A key equal for two solved forms exactly when they are the same up to
    renaming of bound variables, order of equations, and orientation inside
    classes of free variables equated with each other."""
    if type(e) is ConstTrue:
        return ("true",)
    if type(e) is ConstFalse:
        return ("false",)
    bound = set(e.bound)
    elim = {x for x, _ in e.bindings}
    classes: dict = {}
    for x, s in e.bindings:
        if type(s) is Var and s.name not in bound and s.name not in elim:
            classes.setdefault(s.name, {s.name}).add(x)
    rename: dict = {}
    var_binding: dict = {}
    for y, members in classes.items():
        rep = min(members)
        rename[y] = Var(rep)
        for m in members:
            if m != rep:
                var_binding[m] = Var(rep)
    rows = []
    for x, s in e.bindings:
        if x in var_binding:
            continue
        if type(s) is Var and s.name in classes:
            continue
        rows.append((x, subst_term(s, rename)))
    rows.extend(var_binding.items())
    rows.sort(key=lambda r: r[0])
    atoms = [subst_atom(a, rename) for a in e.atoms]
    order: dict = {}

    def visit(t):
        if type(t) is Var:
            if t.name in bound and t.name not in order:
                order[t.name] = Var(f"#{len(order)}")
        else:
            for a in t.args:
                visit(a)

    for _, s in rows:
        visit(s)
    for a in atoms:
        for s in a.args:
            visit(s)
    return (tuple((x, subst_term(s, order)) for x, s in rows),
            tuple(subst_atom(a, order) for a in atoms))


def solved_equal(e1: SolvedForm, e2: SolvedForm) -> bool:
    return canonical_solved(e1) == canonical_solved(e2)


def implies(e1, e2) -> bool:
    """Decide whether ``e1 -> e2`` follows from the free equality axioms."""
    if not isinstance(e1, (ConstTrue, ConstFalse, Shape)):
        e1 = normalize(e1)
    if not isinstance(e2, (ConstTrue, ConstFalse, Shape)):
        e2 = normalize(e2)
    if not (is_atom_free(e1) and is_atom_free(e2)):
        raise ValueError("implies is defined on EQ-formulas only")
    if type(e1) is ConstFalse or type(e2) is ConstTrue:
        return True
    if type(e2) is ConstFalse:
        return False
    both = normalize(And(to_query(e1), to_query(e2)))
    return solved_equal(both, normalize(to_query(e1)))


def equivalent(e1, e2) -> bool:
    return implies(e1, e2) and implies(e2, e1)


# -- nondeterministic step relation --------------------------------------------

def applicable_steps(q: Query, fresh: FreshNames | None = None) -> list:
    """Every single-step successor of ``q`` under rules 1-12.

    Conjunction is treated as associative: a maximal tree of ``And`` nodes
    is handled as a flat sequence and rebuilt left-associated.  Rules 5 and
    6 substitute into the maximal run of equations and atoms around the
    selected equation.
    """
    if fresh is None:
        fresh = FreshNames(avoid=all_vars(q))
    out: list = []
    if type(q) is Falsity:
        return out
    if _contains_false(q):
        out.append(StepTrace(12, q, FALSE))
    _visit_conj(q, lambda n: n, (), out, fresh)
    seen = set()
    unique = []
    for st in out:
        key = (st.rule_id, st.after)
        if key not in seen:
            seen.add(key)
            unique.append(StepTrace(st.rule_id, q, st.after))
    return unique


def _contains_false(q) -> bool:
    t = type(q)
    if t is Falsity:
        return True
    if t is And:
        return _contains_false(q.left) or _contains_false(q.right)
    if t is Exists:
        return _contains_false(q.body)
    return False


def _pure(leaf) -> bool:
    return type(leaf) in (Eq, AtomQ)


def _leaf_subst(leaf, b):
    if type(leaf) is Eq:
        return Eq(subst_term(leaf.lhs, b), subst_term(leaf.rhs, b))
    return AtomQ(subst_atom(leaf.atom, b))


def _leaf_has(leaf, name) -> bool:
    if type(leaf) is Eq:
        return occurs(name, leaf.lhs) or occurs(name, leaf.rhs)
    return any(occurs(name, a) for a in leaf.atom.args)


def _visit_conj(node, rebuild, chain, out, fresh):
    """``node`` is a conjunction root; ``chain`` lists the binders directly above."""
    leaves = conjuncts(node)

    def with_leaves(new):
        flat = []
        for n in new:
            flat.extend(conjuncts(n))
        return rebuild(conj(flat))

    n = len(leaves)
    whole_pure = all(_pure(l) for l in leaves)
    for j, leaf in enumerate(leaves):
        t = type(leaf)
        if t is Truth and n > 1:
            out.append(StepTrace(11, node, with_leaves(leaves[:j] + leaves[j + 1:])))
        elif t is Eq:
            _equation_steps(leaves, j, chain if whole_pure else (), with_leaves, out)
        elif t is Exists:
            _visit_exists(leaf, lambda m, j=j: with_leaves(leaves[:j] + [m] + leaves[j + 1:]),
                          (), out, fresh)
        if j + 1 < n:
            nxt = leaves[j + 1]
            if t is AtomQ and type(nxt) is Eq:
                out.append(StepTrace(10, node, with_leaves(leaves[:j] + [nxt, leaf] + leaves[j + 2:])))
            if t is Exists or type(nxt) is Exists:
                merged = _merge_binders(leaf, nxt, fresh)
                out.append(StepTrace(9, node, with_leaves(leaves[:j] + [merged] + leaves[j + 2:])))


def _visit_exists(node, rebuild, chain, out, fresh):
    if node.var not in free_vars(node.body):
        out.append(StepTrace(8, node, rebuild(node.body)))
    chain = chain + (node.var,)
    body_rebuild = lambda m: rebuild(Exists(node.var, m))
    if type(node.body) is Exists:
        _visit_exists(node.body, body_rebuild, chain, out, fresh)
    else:
        _visit_conj(node.body, body_rebuild, chain, out, fresh)


def _pure_segment(leaves, j):
    lo = j
    while lo > 0 and _pure(leaves[lo - 1]):
        lo -= 1
    hi = j + 1
    while hi < len(leaves) and _pure(leaves[hi]):
        hi += 1
    return lo, hi


def _equation_steps(leaves, j, chain, with_leaves, out):
    eq = leaves[j]
    s, t = eq.lhs, eq.rhs
    if type(s) is App and type(t) is App:
        if s.functor == t.functor and len(s.args) == len(t.args):
            parts = [Eq(a, b) for a, b in zip(s.args, t.args)] or [TRUE]
            out.append(StepTrace(1, eq, with_leaves(leaves[:j] + parts + leaves[j + 1:])))
        else:
            out.append(StepTrace(2, eq, with_leaves(leaves[:j] + [FALSE] + leaves[j + 1:])))
        return
    if type(t) is Var and type(s) is not Var:
        # (7)(i): non-variable on the left
        out.append(StepTrace(7, eq, with_leaves(leaves[:j] + [Eq(t, s)] + leaves[j + 1:])))
    if type(s) is Var and type(t) is Var and s.name != t.name:
        # (7)(ii): t = x with x bound here and t a free variable of the block
        if t.name in chain and s.name not in chain:
            out.append(StepTrace(7, eq, with_leaves(leaves[:j] + [Eq(t, s)] + leaves[j + 1:])))
    if type(s) is not Var:
        return
    x = s.name
    if type(t) is Var and t.name == x:
        out.append(StepTrace(4, eq, with_leaves(leaves[:j] + [TRUE] + leaves[j + 1:])))
        return
    if occurs(x, t):
        out.append(StepTrace(3, eq, with_leaves(leaves[:j] + [FALSE] + leaves[j + 1:])))
        return
    b = {x: t}
    lo, hi = _pure_segment(leaves, j)
    if any(_leaf_has(leaves[k], x) for k in range(lo, hi) if k != j):
        new = [(_leaf_subst(l, b) if lo <= k < hi and k != j else l) for k, l in enumerate(leaves)]
        out.append(StepTrace(5, eq, with_leaves(new)))
    if x in chain:
        new = [(_leaf_subst(l, b) if k != j else TRUE) for k, l in enumerate(leaves)]
        out.append(StepTrace(6, eq, with_leaves(new)))


def _chain(q):
    names = []
    while type(q) is Exists:
        names.append(q.var)
        q = q.body
    return names, q


def _merge_binders(left, right, fresh):
    """Rule 9 on two adjacent conjuncts, renaming binders apart where needed."""
    y1, q1 = _chain(left)
    y2, q2 = _chain(right)
    free1 = free_vars(left)
    free2 = free_vars(right)
    z1 = []
    for v in y1:
        if v in free2 or v in y2 or v in z1:
            new = fresh()
            q1 = _rename_bound(q1, y1, v, new)
            v = new
        z1.append(v)
    z2 = []
    for v in y2:
        if v in free1 or v in z1 or v in z2:
            new = fresh()
            q2 = _rename_bound(q2, y2, v, new)
            v = new
        z2.append(v)
    return exists(z1 + z2, conj(conjuncts(q1) + conjuncts(q2)))


def _rename_bound(body, chain, old, new):
    # only the innermost binder of ``old`` in the chain scopes over ``body``
    return replace_free(body, {old: Var(new)})
