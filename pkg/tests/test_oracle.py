import itertools

import pytest

from tthammer import fol, oracle
from tthammer.fol import (
    And, Atom, BOTTOM, Eq, Exists, FFun, FVar, Forall, Implies, Not, Or, const,
)
from tthammer.oracle import Model, enumerate_formulas, eval_finite_model, ipc_decide

A, B = Atom("A"), Atom("B")


def test_eval_examples():
    x = FVar("x")
    assert eval_finite_model(Forall("x", Eq(x, x)), Model(2))
    assert not eval_finite_model(Exists("x", Atom("q", (x,))), Model(3, {}, {"q": set()}))
    with pytest.raises(oracle.MissingTable):
        eval_finite_model(Atom("q", (const("c"),)), Model(1))


def test_iter_models_count():
    assert len(list(oracle.iter_models({"c": 0, "f": 1}, {"q": 1}, 2))) == 2 * 4 * 4


def test_ipc_examples():
    assert ipc_decide(Implies(A, A))
    assert not ipc_decide(Implies(Implies(Implies(A, B), A), A))
    assert ipc_decide(Not(Not(Or(A, Not(A)))))
    assert not ipc_decide(Or(A, Not(A)))
    with pytest.raises(oracle.NotPropositional):
        ipc_decide(Forall("x", A))
    with pytest.raises(oracle.NotPropositional):
        ipc_decide(Eq(const("a"), const("b")))


def test_enumerate_examples():
    assert list(enumerate_formulas(1, 0)) == [A, BOTTOM]
    level1 = set(enumerate_formulas(1, 1))
    for f in [Not(A), Implies(A, A), And(A, A), Or(A, A), Implies(BOTTOM, A)]:
        assert f in level1


def test_enumeration_count_pinned():
    formulas = list(enumerate_formulas(2, 2))
    assert len(formulas) == 603
    assert len(set(formulas)) == 603
    assert oracle.count_formulas(3, 4) == 1462868


def test_ipc_implies_classical():
    for f in enumerate_formulas(2, 3):
        if ipc_decide(f):
            assert oracle.classically_valid(f)


def test_classical_check_on_known_formulas():
    assert oracle.classically_valid(Or(A, Not(A)))
    assert not oracle.classically_valid(Or(A, B))


def test_ground_congruent_examples():
    a, b, c = const("a"), const("b"), const("c")
    f = lambda t: FFun("f", (t,))  # noqa: E731
    g = lambda t: FFun("g", (t,))  # noqa: E731
    assert oracle.ground_congruent([(a, b), (f(a), c)], f(b), c)
    assert oracle.ground_congruent([], a, a)
    assert not oracle.ground_congruent([(a, b)], f(a), g(a))
    assert oracle.ground_atoms_congruent([(a, b)], Atom("q", (a,)), Atom("q", (b,)))


def test_closed_formula_enumeration():
    fs = list(oracle.enumerate_closed_formulas(max_connectives=1, max_quantifiers=1))
    assert fs
    assert all(fol.formula_free_vars(f) == [] for f in fs)
    keys = {oracle._canonical_key(f, {}, [0]) for f in fs}
    assert len(keys) == len(fs)


def test_random_ground_instances_respect_bounds():
    import random
    rng = random.Random(1)
    for _ in range(50):
        eqs, (l, r) = oracle.random_ground_instance(rng)
        assert len(eqs) <= 8
        names = {t.name for e in eqs for s in e for t in _subterms(s)}
        assert names <= {"a", "b", "f", "g"}


def _subterms(t):
    yield t
    for a in t.args:
        yield from _subterms(a)


def test_satisfiable_small():
    x = FVar("x")
    q = lambda t: Atom("q", (t,))  # noqa: E731
    assert oracle.satisfiable([Exists("x", q(x)), Exists("x", Not(q(x)))], 2)
    assert not oracle.satisfiable([Exists("x", q(x)), Exists("x", Not(q(x)))], 1)
    assert not any(oracle.satisfiable([q(const("c")), Not(q(const("c")))], n) for n in (1, 2, 3))
    assert list(itertools.islice(oracle.iter_models({}, {}, 1), 2)) == [Model(1, {}, {})]
