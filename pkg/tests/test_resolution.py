from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from eqlp.parser import parse_program, parse_query
from eqlp.resolution import (
    ALL_ATOMS, INCONSISTENT, LEFTMOST, NO_RESOLVENT, Answer, DerivationNode, FailureReport,
    JoinMismatch, Limits, PredicateMismatch, SelectionError, atomic_reduction, derivation_concat,
    derive, outcome, parallel_compose, reduction, resolvent, resolvents, seeded_random,
    validate_derivation,
)
from eqlp.solver import CONST_TRUE, as_solved_form, equivalent, is_solved_form, normalize, to_query
from eqlp.substitution import Order, Substitution, compare
from eqlp.terms import App, Atom, Clause, FreshNames, Var, atom_count, free_vars, is_variant

from oracles import random_query, rename_free
from suite import DATALOG, PAPER_PQ, SUITE

X, Y, Z = Var("X"), Var("Y"), Var("Z")
PQ = parse_program("p(f(Z)).\nq(g(Z)).")


def sf(text):
    return as_solved_form(parse_query(text))


def test_atomic_reduction_examples():
    c = PQ.clauses[0]
    red = atomic_reduction(Atom("p", (X,)), c, FreshNames())
    assert is_variant(red, parse_query("exists Z1 . (X = f(Z1), true)"))
    assert equivalent(normalize(red), sf("exists Z . (X = f(Z))"))
    closed = parse_program("p(a).").clauses[0]
    assert atomic_reduction(Atom("p", (App("a"),)), closed, FreshNames()) == parse_query("a = a, true")
    with pytest.raises(PredicateMismatch):
        atomic_reduction(Atom("p", (X,)), parse_program("q(X).").clauses[0], FreshNames())


def test_reduction_examples():
    q = parse_query("p(X), q(Y)")
    red = reduction(q, [0, 1], list(PQ.clauses), FreshNames(avoid={"X", "Y", "Z"}))
    assert is_variant(red, parse_query(
        "exists Z1 . (X = f(Z1), true), exists Z2 . (Y = g(Z2), true)"))
    single = reduction(parse_query("p(X)"), [0], [PQ.clauses[0]], FreshNames())
    assert is_variant(single, atomic_reduction(Atom("p", (X,)), PQ.clauses[0], FreshNames()))
    with pytest.raises(SelectionError):
        reduction(q, [2], [PQ.clauses[0]], FreshNames())
    with pytest.raises(SelectionError):
        reduction(q, [0, 0], list(PQ.clauses[:1]) * 2, FreshNames())
    with pytest.raises(PredicateMismatch):
        reduction(q, [0], [PQ.clauses[1]], FreshNames())


def test_resolvent_examples():
    r = resolvent(parse_query("p(X)"), [0], [PQ.clauses[0]], FreshNames())
    assert is_solved_form(r) and equivalent(as_solved_form(r), sf("exists Z . (X = f(Z))"))
    pb = parse_program("p(b).")
    assert resolvent(parse_query("p(a)"), [0], [pb.clauses[0]], FreshNames()) == parse_query("false")
    assert list(resolvents(PQ, parse_query("r(X)"), LEFTMOST, FreshNames())) == [NO_RESOLVENT]
    with pytest.raises(SelectionError):
        resolvent(parse_query("X = a"), [0], [PQ.clauses[0]], FreshNames())


def test_derive_paper_example_all_selections():
    target = sf("exists Z1 . exists Z2 . (X = f(Z1), Y = g(Z2))")
    for cm in (LEFTMOST, ALL_ATOMS, seeded_random(3)):
        got = list(derive(PQ, parse_query("p(X), q(Y)"), cm))
        assert len(got) == 1
        assert equivalent(got[0].eq_formula, target)
        Z1, Z2 = Var("Z1"), Var("Z2")
        view = Substitution({"X": App("f", (Z1,)), "Y": App("g", (Z2,))})
        assert compare(got[0].substitution, view) is Order.EQUIVALENT


def test_derive_two_facts_in_clause_order():
    prog = parse_program("p(a). p(b).")
    got = list(derive(prog, parse_query("p(X)")))
    assert [a.eq_formula for a in got] == [sf("X = a"), sf("X = b")]


def test_derive_true_query():
    got = list(derive(PQ, parse_query("true")))
    assert len(got) == 1 and got[0].eq_formula == CONST_TRUE
    assert len(got[0].derivation) == 1


def test_derive_unknown_predicate_and_failures():
    assert list(derive(PQ, parse_query("r(X)"))) == []
    reports = list(derive(PQ, parse_query("r(X)"), failures=True))
    assert [r.kind for r in reports] == ["no_resolvent"]
    reports = list(derive(PQ, parse_query("p(a)"), failures=True))
    assert [r.kind for r in reports] == ["false"]


def test_depth_exhaustion_reported():
    loop = parse_program("r(X) :- r(X).")
    reports = list(derive(loop, parse_query("r(a)"), limits=Limits(5), failures=True))
    assert reports == [FailureReport("depth_exhausted", 5)]


def test_iterative_deepening_finds_answers_behind_infinite_branch():
    prog = parse_program("nat(s(X)) :- nat(X).\nnat(zero).")
    got = list(derive(prog, parse_query("nat(X)"), limits=Limits(10, 3)))
    assert [a.eq_formula for a in got] == [
        sf("X = zero"), sf("X = s(zero)"), sf("X = s(s(zero))")]


def test_answer_kernel_within_query_vars():
    for sp in SUITE:
        prog = sp.program()
        for q in sp.parsed_queries():
            for a in derive(prog, q, limits=Limits(64, sp.max_answers)):
                assert a.kernel <= free_vars(q)
                assert atom_count(to_query(a.eq_formula)) == 0


def test_parallel_compose_examples():
    e1 = Answer(sf("exists Z . (X = f(Z))"), frozenset({"X"}))
    e2 = Answer(sf("exists Z . (Y = g(Z))"), frozenset({"Y"}))
    both = parallel_compose(e1, e2)
    assert both.query_vars == {"X", "Y"}
    assert equivalent(both.eq_formula, sf("exists Z1 . exists Z2 . (X = f(Z1), Y = g(Z2))"))
    top = Answer(CONST_TRUE, frozenset())
    assert equivalent(parallel_compose(e1, top).eq_formula, e1.eq_formula)
    assert parallel_compose(Answer(sf("X = a"), frozenset({"X"})),
                            Answer(sf("X = b"), frozenset({"X"}))) is INCONSISTENT


@settings(max_examples=150, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_parallel_compose_commutative_associative(seed):
    rng = random.Random(seed)
    F = {"a": 0, "f": 1, "g": 2}
    parts = []
    while len(parts) < 3:
        e = normalize(random_query(rng, F, {}, max_depth=3, n_vars=4))
        if e != normalize(parse_query("false")):
            parts.append(Answer(e, frozenset(free_vars(to_query(e)))))
    a, b, c = parts

    def same(u, v):
        if u is INCONSISTENT or v is INCONSISTENT:
            return u is v
        return equivalent(u.eq_formula, v.eq_formula) and u.query_vars == v.query_vars

    assert same(parallel_compose(a, b), parallel_compose(b, a))
    ab = parallel_compose(a, b)
    bc = parallel_compose(b, c)
    left = INCONSISTENT if ab is INCONSISTENT else parallel_compose(ab, c)
    right = INCONSISTENT if bc is INCONSISTENT else parallel_compose(a, bc)
    assert same(left, right)


def _first_derivation(prog, text, **kw):
    return next(iter(derive(prog, parse_query(text), **kw))).derivation


def test_derivation_concat_and_validation():
    prog = PAPER_PQ.program()
    nodes = _first_derivation(parse_program(
        "r(X) :- s(X).\ns(X) :- t(X).\nt(a)."), "r(X)")
    prog3 = parse_program("r(X) :- s(X).\ns(X) :- t(X).\nt(a).")
    assert len(nodes) == 4 and validate_derivation(prog3, nodes)
    prefix, suffix = list(nodes[:3]), [DerivationNode(nodes[2].query, 0)] + [
        DerivationNode(nodes[3].query, 1, nodes[3].clause_choices, nodes[3].positions)]
    joined = derivation_concat(prefix, suffix)
    assert [n.depth for n in joined] == [0, 1, 2, 3]
    assert validate_derivation(prog3, joined) and outcome(joined) == "refutation"
    assert derivation_concat(prefix, []) == prefix
    with pytest.raises(JoinMismatch):
        derivation_concat(prefix, [DerivationNode(parse_query("t(b)"), 0)])
    # a tampered step is rejected
    bad = list(nodes)
    bad[2] = DerivationNode(parse_query("t(b)"), 2, bad[2].clause_choices, bad[2].positions)
    assert not validate_derivation(prog3, bad)
    assert outcome(nodes[:2]) == "running"
    assert validate_derivation(prog, _first_derivation(prog, "p(X), q(Y)"))


def test_suite_derivations_validate():
    for sp in SUITE:
        prog = sp.program()
        for q in sp.parsed_queries():
            for a in derive(prog, q, limits=Limits(64, min(sp.max_answers, 4))):
                assert validate_derivation(prog, a.derivation)


def _rename_bound(q, suffix):
    from eqlp.terms import And, Exists, replace_free
    if type(q) is And:
        return And(_rename_bound(q.left, suffix), _rename_bound(q.right, suffix))
    if type(q) is Exists:
        return Exists(q.var + suffix,
                      replace_free(_rename_bound(q.body, suffix), {q.var: Var(q.var + suffix)}))
    return q


def test_variant_queries_have_variant_resolvents():
    # Q1 a variant of Q2 gives resolvents Q1' and Q2' that are variants of each
    # other, for the same selected atoms and clauses
    rng = random.Random(9)
    prog = parse_program("p(f(Z)). p(g(A, B)) :- exists C . (q(A, C), p(B)). q(X, X).")
    F = {"a": 0, "f": 1, "g": 2}
    done = 0
    while done < 200:
        q1 = random_query(rng, F, {"p": 1, "q": 2}, max_depth=3, atom_rate=0.5)
        n = atom_count(q1)
        if not n:
            continue
        q2 = _rename_bound(q1, "v")
        assert is_variant(q1, q2)
        from eqlp.terms import atoms_of
        atoms = atoms_of(q1)
        positions = sorted(rng.sample(range(n), rng.randint(1, n)))
        clauses = [rng.choice(prog.matching(atoms[p].predicate, len(atoms[p].args)))
                   for p in positions]
        clauses = [prog.clauses[i] for i in clauses]
        r1 = resolvent(q1, positions, clauses, FreshNames(0, avoid={"Z", "A", "B", "C", "X"}))
        r2 = resolvent(q2, positions, clauses, FreshNames(40, avoid={"Z", "A", "B", "C", "X"}))
        assert is_variant(r1, r2)
        done += 1


def test_selection_is_stable_and_nonempty():
    q = parse_query("p(X), exists Z . (q(Z, X), p(Z)), r")
    for cm in (LEFTMOST, ALL_ATOMS, seeded_random(0), seeded_random(7)):
        for depth in range(5):
            pos = cm.select(q, depth)
            assert pos and len(set(pos)) == len(pos)
            assert cm.select(_rename_bound(q, "w"), depth) == pos
    with pytest.raises(SelectionError):
        LEFTMOST.select(parse_query("X = a"))


def test_selection_independence_on_datalog():
    for sp in DATALOG:
        prog = sp.program()
        for q in sp.parsed_queries():
            sets = []
            for cm in (LEFTMOST, ALL_ATOMS):
                found = list(derive(prog, q, cm, Limits(12, None if sp.name != "colors" else 64)))
                sets.append(found)
            for a in sets[0]:
                assert any(equivalent(a.eq_formula, b.eq_formula) for b in sets[1])
            for b in sets[1]:
                assert any(equivalent(a.eq_formula, b.eq_formula) for a in sets[0])


def test_variant_independence_under_free_renaming():
    for sp in SUITE:
        prog = sp.program()
        for q in sp.parsed_queries():
            names = sorted(free_vars(q))
            mapping = {v: Var(f"R{len(names) - i}") for i, v in enumerate(names)}
            renamed = rename_free(q, mapping)
            lim = Limits(64, sp.max_answers)
            xs = [rename_free(to_query(a.eq_formula), mapping) for a in derive(prog, q, limits=lim)]
            ys = [to_query(a.eq_formula) for a in derive(prog, renamed, limits=lim)]
            assert len(xs) == len(ys)
            for u, v in zip(xs, ys):
                assert equivalent(as_solved_form(u), as_solved_form(v))
