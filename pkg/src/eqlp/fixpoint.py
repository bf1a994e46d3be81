"""Bottom-up Herbrand semantics over a depth-bounded universe.

Valuations send variables to ground terms of a :class:`UniverseBound`;
existential quantifiers in clause bodies and queries range over the same
bounded set.  For function-free alphabets the bound is the whole Herbrand
universe, so everything here is exact; otherwise results are labelled as
bounded approximations.

Two evaluators share one constraint search:

* materialized -- :func:`tp_step` / :func:`tp_power` build interpretations
  as explicit atom sets (fine for Datalog and tiny universes);
* on demand -- :class:`PowerMembership` decides ``A in T_P^n`` top-down with
  memoization, which is what :func:`check_correct_answer` uses so that
  universes with thousands of terms remain tractable.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .solver import ConstFalse, SolvedForm, is_atom_free, to_query
from .terms import (
    Alphabet, And, App, Atom, AtomQ, Eq, Exists, Falsity, Program, Query, Truth, Var,
    free_vars, is_ground, subst_atom, subst_term, term_depth, term_vars,
)


class EmptyAlphabet(ValueError):
    pass


# -- universe ------------------------------------------------------------------

@dataclass(frozen=True)
class UniverseBound:
    max_term_depth: int
    generated: tuple
    alphabet: Alphabet = field(compare=False, repr=False, default_factory=Alphabet)
    # number of generated terms of depth <= k, for k = 0 .. max_term_depth
    prefixes: tuple = field(compare=False, repr=False, default=())

    @property
    def exact(self) -> bool:
        """True when the bound covers the full Herbrand universe."""
        return self.alphabet.is_function_free()

    def __contains__(self, t) -> bool:
        return _in_universe(t, self.alphabet.functors, self.max_term_depth)

    def __len__(self) -> int:
        return len(self.generated)

    def __iter__(self):
        return iter(self.generated)


def _in_universe(t, functors, depth) -> bool:
    if type(t) is Var:
        return False
    if functors.get(t.functor) != len(t.args):
        return False
    if not t.args:
        return True
    if depth == 0:
        return False
    return all(_in_universe(a, functors, depth - 1) for a in t.args)


def enumerate_universe(alphabet: Alphabet, depth: int) -> UniverseBound:
    """All ground terms of depth at most ``depth`` (constants have depth 0)."""
    consts = alphabet.constants()
    if not consts:
        raise EmptyAlphabet("the alphabet has no constant")
    funcs = sorted((f, n) for f, n in alphabet.functors.items() if n > 0)
    layers = [[App(c) for c in consts]]  # layers[k]: terms of depth exactly k
    upto = list(layers[0])
    for k in range(1, depth + 1):
        fresh = []
        for f, n in funcs:
            for args in itertools.product(upto, repeat=n):
                if any(term_depth(a) == k - 1 for a in args):
                    fresh.append(App(f, args))
        if not fresh:
            break
        layers.append(fresh)
        upto = upto + fresh
    prefixes = list(itertools.accumulate(len(layer) for layer in layers))
    prefixes += [prefixes[-1]] * (depth + 1 - len(prefixes))
    return UniverseBound(depth, tuple(upto), alphabet, tuple(prefixes))


# -- interpretations -------------------------------------------------------------

@dataclass(frozen=True)
class GroundAtomSet:
    atoms: frozenset = frozenset()

    def __post_init__(self):
        for a in self.atoms:
            if not all(is_ground(t) for t in a.args):
                raise ValueError(f"non-ground atom {a}")

    def __contains__(self, a) -> bool:
        return a in self.atoms

    def __iter__(self):
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __le__(self, other: "GroundAtomSet") -> bool:
        return self.atoms <= other.atoms

    def index(self) -> dict:
        out: dict = {}
        for a in self.atoms:
            out.setdefault((a.predicate, len(a.args)), []).append(a)
        return out

    def sorted(self) -> list:
        return sorted(self.atoms, key=str)


EMPTY_SET = GroundAtomSet()


# -- flattening queries into literal lists ----------------------------------------

class _Unsat(Exception):
    pass


def _flatten(q: Query, counter: list, env: dict, out: list) -> None:
    """Binders become ``#k`` variables; '#' never occurs in parsed names."""
    t = type(q)
    if t is Eq:
        out.append(Eq(subst_term(q.lhs, env), subst_term(q.rhs, env)))
    elif t is AtomQ:
        out.append(subst_atom(q.atom, env))
    elif t is And:
        _flatten(q.left, counter, env, out)
        _flatten(q.right, counter, env, out)
    elif t is Exists:
        name = f"#{counter[0]}"
        counter[0] += 1
        _flatten(q.body, counter, {**env, q.var: Var(name)}, out)
    elif t is Falsity:
        raise _Unsat
    # Truth contributes nothing


def literals(q: Query):
    """``None`` when the query contains FALSE, else a list of Eq/Atom literals."""
    out: list = []
    try:
        _flatten(q, [0], {}, out)
    except _Unsat:
        return None
    return out


def _lit_vars(lit, acc):
    if type(lit) is Eq:
        term_vars(lit.lhs, acc)
        term_vars(lit.rhs, acc)
    else:
        for a in lit.args:
            term_vars(a, acc)
    return acc


# -- the shared constraint search ------------------------------------------------

class _Context:
    """How atoms are decided: against a materialized set or on demand."""

    def __init__(self, u: UniverseBound, holds, index=None, instances=None):
        self.u = u
        self.holds = holds
        self.index = index
        self.instances = instances
        self.functors = u.alphabet.functors
        self.depth = u.max_term_depth
        self._in_u: dict = {}
        self._prefix = u.prefixes or _depth_prefixes(u)

    def prefix(self, limit: int) -> int:
        """How many universe terms have depth at most ``limit``."""
        if limit < 0:
            return 0
        return self._prefix[min(limit, len(self._prefix) - 1)]

    def in_u(self, t) -> bool:
        r = self._in_u.get(t)
        if r is None:
            r = _in_universe(t, self.functors, self.depth)
            self._in_u[t] = r
        return r


def _depth_prefixes(u: UniverseBound) -> list:
    # generated terms are ordered by depth
    counts = [0] * (u.max_term_depth + 1)
    for t in u.generated:
        counts[term_depth(t)] += 1
    out, total = [], 0
    for c in counts:
        total += c
        out.append(total)
    return out


def _propagate(lits, env, ctx):
    """Simplify under ``env``; return remaining literals or raise _Unsat."""
    pending = list(lits)
    rest = []
    changed = True
    while changed:
        changed = False
        rest = []
        while pending:
            lit = pending.pop()
            if type(lit) is Eq:
                s = subst_term(lit.lhs, env)
                t = subst_term(lit.rhs, env)
                if type(s) is App and type(t) is App:
                    if s.functor != t.functor or len(s.args) != len(t.args):
                        raise _Unsat
                    pending.extend(Eq(a, b) for a, b in zip(s.args, t.args))
                elif s == t:
                    continue
                elif type(s) is Var and is_ground(t):
                    if not ctx.in_u(t):
                        raise _Unsat
                    env[s.name] = t
                    changed = True
                elif type(t) is Var and is_ground(s):
                    if not ctx.in_u(s):
                        raise _Unsat
                    env[t.name] = s
                    changed = True
                else:
                    rest.append(Eq(s, t))
            else:
                a = subst_atom(lit, env)
                if all(is_ground(x) for x in a.args):
                    if not ctx.holds(a):
                        raise _Unsat
                else:
                    rest.append(a)
        pending = rest
    return rest


def _match(pattern, ground, env, ctx) -> bool:
    stack = [(pattern, ground)]
    while stack:
        p, g = stack.pop()
        if type(p) is Var:
            old = env.get(p.name)
            if old is None:
                if not ctx.in_u(g):
                    return False
                env[p.name] = g
            elif old != g:
                return False
        elif type(g) is Var or p.functor != g.functor or len(p.args) != len(g.args):
            return False
        else:
            stack.extend(zip(p.args, g.args))
    return True


def search(lits, env: dict, required: Iterable[str], ctx: _Context) -> Iterator[dict]:
    """All extensions of ``env`` over ``u`` satisfying ``lits`` and binding ``required``."""
    required = tuple(required)
    yield from _search(lits, dict(env), required, ctx)


def _search(lits, env, required, ctx):
    try:
        rest = _propagate(lits, env, ctx)
    except _Unsat:
        return
    if not rest:
        missing = [v for v in required if v not in env]
        if not missing:
            yield env
            return
        v = missing[0]
        for t in ctx.u.generated:
            yield from _search((), {**env, v: t}, required, ctx)
        return
    atoms = [a for a in rest if type(a) is Atom]
    if atoms and ctx.index is not None:
        a = min(atoms, key=lambda x: len(ctx.index.get((x.predicate, len(x.args)), ())))
        candidates = ctx.index.get((a.predicate, len(a.args)), ())
    elif atoms and ctx.instances is not None:
        a = min(atoms, key=_open_positions)
        candidates = ctx.instances(a)
    else:
        a = None
    if a is not None:
        for g in candidates:
            env2 = dict(env)
            if _match_atom(a, g, env2, ctx):
                yield from _search(rest, env2, required, ctx)
        return
    v, limit = _pick_variable(rest, ctx)
    for t in ctx.u.generated[:ctx.prefix(limit)]:
        yield from _search(rest, {**env, v: t}, required, ctx)


def _open_positions(a: Atom) -> int:
    return sum(1 for t in a.args if not is_ground(t))


def _occurrence_limits(t, budget, limits):
    if type(t) is Var:
        limits[t.name] = min(limits.get(t.name, budget), budget)
    else:
        for a in t.args:
            _occurrence_limits(a, budget - 1, limits)


def _pick_variable(rest, ctx):
    """The unbound variable with the fewest candidate values.

    Every variable takes values in ``u``; in ``x = t`` with ``x`` a variable,
    ``t`` must itself lie in ``u``, which caps the depth of its variables.
    """
    d = ctx.depth
    limits: dict = {}
    for lit in rest:
        if type(lit) is Eq:
            for side, other in ((lit.lhs, lit.rhs), (lit.rhs, lit.lhs)):
                if type(side) is Var:
                    limits[side.name] = min(limits.get(side.name, d), d)
                    _occurrence_limits(other, d, limits)
        acc: set = set()
        _lit_vars(lit, acc)
        for v in acc:
            limits.setdefault(v, d)
    return min(sorted(limits.items()), key=lambda kv: ctx.prefix(kv[1]))


def _match_atom(pattern: Atom, ground: Atom, env, ctx) -> bool:
    return _match(App(pattern.predicate, pattern.args), App(ground.predicate, ground.args),
                  env, ctx)


# -- T_P ----------------------------------------------------------------------------

@dataclass(frozen=True)
class _PreparedClause:
    head: Atom
    body: tuple | None
    variables: tuple


def _prepare(program: Program) -> list:
    out = []
    for c in program.clauses:
        body = literals(c.body)
        out.append(_PreparedClause(c.head, None if body is None else tuple(body),
                                   tuple(c.variables())))
    return out


def tp_step(program: Program, i: GroundAtomSet, u: UniverseBound) -> GroundAtomSet:
    """One application of the immediate consequence operator."""
    ctx = _Context(u, i.atoms.__contains__, i.index())
    out = set()
    for c in _prepare(program):
        if c.body is None:
            continue
        for env in search(c.body, {}, c.variables, ctx):
            out.add(subst_atom(c.head, env))
    return GroundAtomSet(frozenset(out))


def tp_power(program: Program, n: int, u: UniverseBound) -> GroundAtomSet:
    i = EMPTY_SET
    for _ in range(n):
        nxt = tp_step(program, i, u)
        if nxt == i:
            break
        i = nxt
    return i


def tp_powers(program: Program, max_n: int, u: UniverseBound) -> list:
    """``[T^0, T^1, ...]`` up to ``max_n`` or the first repetition."""
    seq = [EMPTY_SET]
    for _ in range(max_n):
        nxt = tp_step(program, seq[-1], u)
        if nxt == seq[-1]:
            break
        seq.append(nxt)
    return seq


def least_fixpoint(program: Program, u: UniverseBound, max_n: int = 32):
    """``(interpretation, n, reached)``: iterate until stable or ``max_n`` steps."""
    i = EMPTY_SET
    for n in range(max_n + 1):
        nxt = tp_step(program, i, u)
        if nxt == i:
            return i, n, True
        if n == max_n:
            break
        i = nxt
    return i, max_n, False


class PowerMembership:
    """Decide ``A in T_P^n`` top-down; agrees with :func:`tp_power` membership."""

    def __init__(self, program: Program, u: UniverseBound):
        self.u = u
        self.clauses = {}
        for c in _prepare(program):
            self.clauses.setdefault((c.head.predicate, len(c.head.args)), []).append(c)
        self.true_from: dict = {}   # atom -> least level known to hold
        self.false_upto: dict = {}  # atom -> greatest level known to fail
        self._ctx: dict = {}
        self._instances: dict = {}

    def ctx(self, n: int) -> _Context:
        c = self._ctx.get(n)
        if c is None:
            c = _Context(self.u, lambda a, n=n: self.member(a, n),
                         instances=lambda a, n=n: self.instances(a, n))
            self._ctx[n] = c
        return c

    def instances(self, pattern: Atom, n: int) -> list:
        """Ground atoms of ``T_P^n`` matching ``pattern`` (values drawn from ``u``)."""
        if n <= 0:
            return []
        names: dict = {}
        for t in pattern.args:
            for v in _ordered_term_vars(t):
                names.setdefault(v, Var(f"?{len(names)}"))
        canon = subst_atom(pattern, names)
        key = (canon, n)
        hit = self._instances.get(key)
        if hit is not None:
            return hit
        found: dict = {}
        ctx = self.ctx(n - 1)
        pattern_vars = tuple(v.name for v in names.values())
        for c in self.clauses.get((canon.predicate, len(canon.args)), ()):
            if c.body is None:
                continue
            lits = [Eq(p, h) for p, h in zip(canon.args, c.head.args)] + list(c.body)
            for env in search(lits, {}, c.variables + pattern_vars, ctx):
                g = subst_atom(canon, env)
                found[g] = None
                if self.true_from.get(g, n + 1) > n:
                    self.true_from[g] = n
        out = list(found)
        self._instances[key] = out
        return out

    def member(self, a: Atom, n: int) -> bool:
        if n <= 0:
            return False
        t = self.true_from.get(a)
        if t is not None and t <= n:
            return True
        f = self.false_upto.get(a, 0)
        if f >= n:
            return False
        ctx = self.ctx(n - 1)
        for c in self.clauses.get((a.predicate, len(a.args)), ()):
            if c.body is None:
                continue
            env: dict = {}
            if not _match_atom(c.head, a, env, ctx):
                continue
            for _ in search(c.body, env, c.variables, ctx):
                self.true_from[a] = min(n, self.true_from.get(a, n))
                return True
        self.false_upto[a] = n
        return False

    def query_holds(self, lits, env: dict, n: int) -> bool:
        for _ in search(lits, env, (), self.ctx(n)):
            return True
        return False


def _ordered_term_vars(t) -> list:
    if type(t) is Var:
        return [t.name]
    out = []
    for a in t.args:
        out.extend(_ordered_term_vars(a))
    return out


# -- verdicts ----------------------------------------------------------------------

@dataclass(frozen=True)
class OracleVerdict:
    status: str  # "holds_at", "refuted" or "inconclusive"
    n: int | None = None
    witness: tuple = ()
    checked: int = 0
    exact: bool = False
    bound: tuple = ()

    @property
    def holds(self) -> bool:
        return self.status == "holds_at"

    def __str__(self) -> str:
        if self.status == "holds_at":
            return f"holds_at({self.n})"
        if self.status == "refuted":
            return "refuted(" + ", ".join(f"{x}={t}" for x, t in self.witness) + ")"
        depth, max_n = self.bound
        return f"inconclusive(depth={depth}, n={max_n})"


def solutions(e, u: UniverseBound, variables: Iterable[str]) -> Iterator[dict]:
    """Valuations of ``variables`` over ``u`` satisfying an atom-free formula."""
    q = to_query(e) if not isinstance(e, (Truth, Falsity, Eq, AtomQ, And, Exists)) else e
    lits = literals(q)
    if lits is None:
        return
    ctx = _Context(u, lambda a: False)
    variables = sorted(variables)
    seen = set()
    for env in search(lits, {}, variables, ctx):
        key = tuple(env[v] for v in variables)
        if key not in seen:
            seen.add(key)
            yield dict(zip(variables, key))


def check_correct_answer(program: Program, e: SolvedForm, q: Query, u: UniverseBound,
                         max_n: int = 32) -> OracleVerdict:
    """Bounded check that every ``u``-solution of ``e`` satisfies ``q`` in some power."""
    if type(e) is ConstFalse:
        raise ValueError("the answer must be consistent")
    if not is_atom_free(e):
        raise ValueError("the answer must be atom-free")
    variables = sorted(free_vars(to_query(e)) | free_vars(q))
    qlits = literals(q)
    members = PowerMembership(program, u)
    worst = 0
    checked = 0
    for val in solutions(e, u, variables):
        checked += 1
        if qlits is None or not members.query_holds(qlits, val, max_n):
            witness = tuple((v, val[v]) for v in variables)
            exact = u.exact and least_fixpoint(program, u, max_n)[2]
            if exact:
                return OracleVerdict("refuted", None, witness, checked, True, (u.max_term_depth, max_n))
            return OracleVerdict("inconclusive", None, witness, checked, False,
                                 (u.max_term_depth, max_n))
        lo, hi = 0, max_n  # least level: monotone in n
        if worst > 0 and members.query_holds(qlits, val, worst):
            hi = worst
        while lo < hi:
            mid = (lo + hi) // 2
            if members.query_holds(qlits, val, mid):
                hi = mid
            else:
                lo = mid + 1
        worst = max(worst, lo)
    return OracleVerdict("holds_at", worst, (), checked, u.exact, (u.max_term_depth, max_n))


def enumerate_ground_answers(program: Program, q: Query, u: UniverseBound,
                             max_n: int = 32) -> set:
    """Ground valuations of ``free_vars(q)`` (as sorted pair tuples) true in the bounded fixpoint."""
    lits = literals(q)
    if lits is None:
        return set()
    model, _, _ = least_fixpoint(program, u, max_n)
    ctx = _Context(u, model.atoms.__contains__, model.index())
    variables = sorted(free_vars(q))
    return {tuple((v, env[v]) for v in variables) for env in search(lits, {}, variables, ctx)}


def universe_for(program: Program, *queries, depth: int = 3) -> UniverseBound:
    """Universe over the program's alphabet extended with the queries' symbols."""
    alpha = Alphabet.of(program, *queries)
    return enumerate_universe(alpha, depth)
