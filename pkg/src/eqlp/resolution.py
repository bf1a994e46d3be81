"""Generalized SLD-resolution over queries with equations and binders.

A resolution step replaces a nonempty selection of atoms by their atomic
reductions and normalizes the result.  :func:`derive` explores clause
choices by iterative deepening, so every refutation within the depth bound
is eventually found even for recursive programs.
"""
from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Sequence

from .solver import ConstFalse, SolvedForm, kernel_of, normalize, to_query
from .substitution import from_solved_form
from .terms import (
    And, Atom, AtomQ, Clause, Eq, Exists, Falsity, FreshNames, Program, Query,
    all_vars, atom_count, atoms_of, conj, exists, free_vars, is_variant, rename_clause,
)


class PredicateMismatch(ValueError):
    pass


class SelectionError(ValueError):
    pass


class JoinMismatch(ValueError):
    pass


class _Signal:
    def __init__(self, name: str):
        self.name = name

    def __repr__(self) -> str:
        return self.name


NO_RESOLVENT = _Signal("NO_RESOLVENT")
INCONSISTENT = _Signal("INCONSISTENT")


# -- computation methods -------------------------------------------------------

class Selection(enum.Enum):
    LEFTMOST = "leftmost"
    ALL_ATOMS = "all"
    SEEDED_RANDOM = "random"


@dataclass(frozen=True)
class ComputationMethod:
    """Selection rule plus the deterministic normalizer as rewriting rule.

    Selections depend only on the number of atoms and the depth, so variant
    queries always get corresponding positions.
    """
    selection: Selection = Selection.LEFTMOST
    seed: int = 0

    def select(self, q: Query, depth: int = 0) -> tuple:
        n = atom_count(q)
        if n == 0:
            raise SelectionError("cannot select from a query without atoms")
        if self.selection is Selection.LEFTMOST:
            return (0,)
        if self.selection is Selection.ALL_ATOMS:
            return tuple(range(n))
        rng = random.Random(f"{self.seed}:{n}:{depth}")
        k = rng.randint(1, n)
        return tuple(sorted(rng.sample(range(n), k)))


LEFTMOST = ComputationMethod()
ALL_ATOMS = ComputationMethod(Selection.ALL_ATOMS)


def seeded_random(seed: int) -> ComputationMethod:
    return ComputationMethod(Selection.SEEDED_RANDOM, seed)


# -- reductions ---------------------------------------------------------------

def atomic_reduction(a: Atom, c: Clause, fresh: FreshNames) -> Query:
    if a.predicate != c.head.predicate or len(a.args) != len(c.head.args):
        raise PredicateMismatch(
            f"atom {a} does not match clause head {c.head.predicate}/{len(c.head.args)}")
    renamed = rename_clause(c, fresh)
    eqs = [Eq(s, t) for s, t in zip(a.args, renamed.head.args)]
    return exists(renamed.variables(), conj(eqs + [renamed.body]))


def reduction(q: Query, positions: Sequence[int], clauses: Sequence[Clause],
              fresh: FreshNames) -> Query:
    """Replace the atom at each position (left-to-right atom index) by its reduction."""
    n = atom_count(q)
    positions = list(positions)
    if not positions:
        raise SelectionError("empty selection")
    if len(set(positions)) != len(positions):
        raise SelectionError("selected positions must be distinct")
    if len(clauses) != len(positions):
        raise SelectionError("one clause is needed per selected position")
    for p in positions:
        if not (isinstance(p, int) and 0 <= p < n):
            raise SelectionError(f"position {p} does not denote an atom of the query")
    atoms = atoms_of(q)
    chosen = dict(zip(positions, clauses))
    replacement = {p: atomic_reduction(atoms[p], chosen[p], fresh) for p in sorted(chosen)}
    counter = [0]
    return _replace_atoms(q, replacement, counter)


def _replace_atoms(q, replacement, counter):
    t = type(q)
    if t is AtomQ:
        i = counter[0]
        counter[0] += 1
        return replacement.get(i, q)
    if t is And:
        left = _replace_atoms(q.left, replacement, counter)
        return And(left, _replace_atoms(q.right, replacement, counter))
    if t is Exists:
        return Exists(q.var, _replace_atoms(q.body, replacement, counter))
    return q


def resolvent(q: Query, positions: Sequence[int], clauses: Sequence[Clause],
              fresh: FreshNames, trace: list | None = None):
    """Reduction followed by normalization; a solved-form query (possibly FALSE)."""
    if atom_count(q) == 0:
        raise SelectionError("a resolvent needs at least one atom")
    return to_query(normalize(reduction(q, positions, clauses, fresh), fresh, trace))


def resolvents(program: Program, q: Query, cm: ComputationMethod, fresh: FreshNames,
               depth: int = 0, trace: bool = False) -> Iterator:
    """All resolvents for the selected atoms, clause choices in source order.

    Yields ``(positions, choices, query, steps)``; yields NO_RESOLVENT alone
    when some selected atom has no clause with its predicate.
    """
    positions = cm.select(q, depth)
    atoms = atoms_of(q)
    options = [program.matching(atoms[p].predicate, len(atoms[p].args)) for p in positions]
    if any(not o for o in options):
        yield NO_RESOLVENT
        return
    for choice in itertools.product(*options):
        steps: list | None = [] if trace else None
        nxt = resolvent(q, positions, [program.clauses[i] for i in choice], fresh, steps)
        yield positions, choice, nxt, tuple(steps) if steps is not None else ()


# -- derivations ----------------------------------------------------------------

@dataclass(frozen=True)
class DerivationNode:
    query: Query
    depth: int
    clause_choices: tuple = ()
    positions: tuple = ()
    trace: tuple = ()


@dataclass(frozen=True)
class Answer:
    eq_formula: SolvedForm
    query_vars: frozenset
    derivation: tuple = field(default=(), compare=False)

    @property
    def substitution(self):
        return from_solved_form(self.eq_formula)

    @property
    def kernel(self) -> frozenset:
        return kernel_of(self.eq_formula)


@dataclass(frozen=True)
class FailureReport:
    kind: str  # "false", "no_resolvent" or "depth_exhausted"
    depth: int
    derivation: tuple = field(default=(), compare=False)


@dataclass(frozen=True)
class Limits:
    max_depth: int = 64
    max_answers: int | None = None


def derive(program: Program, q: Query, cm: ComputationMethod = LEFTMOST,
           limits: Limits = Limits(), *, failures: bool = False,
           trace: bool = False) -> Iterator:
    """Enumerate refutations of ``q`` by iterative deepening on derivation length.

    Refutations of length ``d`` are reported in round ``d``, in depth-first
    clause order, so answers come out shortest first.  The search stops once
    a round is not cut off by its bound (the tree is finite), after
    ``max_depth`` rounds, or after ``max_answers`` answers.  With
    ``failures=True`` failed branches are reported too, each exactly once.
    """
    query_vars = frozenset(free_vars(q))
    avoid = set(all_vars(q))
    for c in program.clauses:
        avoid |= all_vars(And(AtomQ(c.head), c.body))
    emitted = 0
    for bound in range(0, limits.max_depth + 1):
        fresh = FreshNames(avoid=avoid)
        root = DerivationNode(q, 0)
        cut = False
        for item in _dfs(program, cm, [root], bound, fresh, failures, trace):
            if item is _CUT:
                cut = True
                continue
            if isinstance(item, FailureReport):
                yield item
                continue
            e = normalize(item[-1].query)
            yield Answer(e, query_vars, tuple(item))
            emitted += 1
            if limits.max_answers is not None and emitted >= limits.max_answers:
                return
        if not cut:
            return
    if failures:
        yield FailureReport("depth_exhausted", limits.max_depth)


_CUT = _Signal("CUT")


def _dfs(program, cm, path, bound, fresh, failures, trace):
    node = path[-1]
    q = node.query
    if type(q) is Falsity:
        if failures and node.depth == bound:
            yield FailureReport("false", node.depth, tuple(path))
        return
    if atom_count(q) == 0:
        if node.depth == bound and type(normalize(q)) is not ConstFalse:
            yield path
        elif failures and node.depth == bound:
            yield FailureReport("false", node.depth, tuple(path))
        return
    if node.depth == bound:
        yield _CUT
        return
    for r in resolvents(program, q, cm, fresh, node.depth, trace):
        if r is NO_RESOLVENT:
            if failures and node.depth + 1 == bound:
                yield FailureReport("no_resolvent", node.depth, tuple(path))
            return
        positions, choice, nxt, steps = r
        child = DerivationNode(nxt, node.depth + 1, choice, positions, steps)
        yield from _dfs(program, cm, path + [child], bound, fresh, failures, trace)


def answers(program: Program, q: Query, cm: ComputationMethod = LEFTMOST,
            max_depth: int = 64, max_answers: int | None = None) -> list:
    return list(derive(program, q, cm, Limits(max_depth, max_answers)))


# -- composition and derivation plumbing ---------------------------------------

def parallel_compose(a1: Answer, a2: Answer):
    e = normalize(And(to_query(a1.eq_formula), to_query(a2.eq_formula)))
    if type(e) is ConstFalse:
        return INCONSISTENT
    return Answer(e, a1.query_vars | a2.query_vars)


def derivation_concat(prefix: Sequence[DerivationNode], suffix: Sequence[DerivationNode]) -> list:
    prefix = list(prefix)
    if not suffix:
        return prefix
    if not prefix:
        return list(suffix)
    if suffix[0].query != prefix[-1].query:
        raise JoinMismatch("the suffix does not start at the last query of the prefix")
    base = prefix[-1].depth - suffix[0].depth
    moved = [DerivationNode(n.query, n.depth + base, n.clause_choices, n.positions, n.trace)
             for n in suffix[1:]]
    return prefix + moved


def validate_derivation(program: Program, nodes: Sequence[DerivationNode]) -> bool:
    """Check every step is a resolvent (up to variant) with consistent depths."""
    if not nodes or nodes[0].depth != 0:
        return False
    for parent, child in zip(nodes, nodes[1:]):
        if child.depth != parent.depth + 1:
            return False
        if type(parent.query) is Falsity or atom_count(parent.query) == 0:
            return False
        try:
            clauses = [program.clauses[i] for i in child.clause_choices]
            fresh = FreshNames(avoid=all_vars(parent.query) | all_vars(child.query))
            expected = resolvent(parent.query, child.positions, clauses, fresh)
        except (SelectionError, PredicateMismatch, IndexError):
            return False
        if not is_variant(expected, child.query):
            return False
    return True


def outcome(nodes: Sequence[DerivationNode]) -> str:
    """Classify the last query: refutation, failed or running."""
    q = nodes[-1].query
    if type(q) is Falsity:
        return "failed"
    if atom_count(q) == 0:
        return "refutation" if type(normalize(q)) is not ConstFalse else "failed"
    return "running"
