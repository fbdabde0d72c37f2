import random

import pytest
from hypothesis import given, settings, strategies as st

from tthammer import fol, oracle, translate
from tthammer.fol import (
    And, Atom, BOTTOM, Eq, Exists, FFun, FVar, Forall, Iff, Implies, LabeledAxiom, Not, Or, Problem,
    Role, Status, TOP, const, parse_szs, prf, simplify, to_tptp, typed,
)


def conjecture_only(f, label="goal"):
    return Problem((), LabeledAxiom(label, Role.CONJECTURE, f))


def test_simplify_examples():
    phi = prf(const("a"))
    assert simplify(And(TOP, phi)) == phi
    assert simplify(Forall("x", phi)) == phi
    assert simplify(Implies(phi, TOP)) == TOP
    assert simplify(Not(Not(phi))) == Not(Not(phi))


def test_to_tptp_smallest():
    text = to_tptp(conjecture_only(prf(const("c"))), header=False)
    assert text.splitlines()[-1] == "fof(goal, conjecture, p(c))."


def test_to_tptp_guarded_axiom():
    x = FVar("x")
    ax = LabeledAxiom("a1", Role.AXIOM, Forall("x", Implies(typed(x, const("nat")), Eq(x, x))))
    p = Problem((ax,), LabeledAxiom("goal", Role.CONJECTURE, TOP))
    assert "fof(a1, axiom, ![X]: (t(X,nat) => (X = X)))." in to_tptp(p).splitlines()


def test_arity_clash():
    f1 = Atom("q", (const("c"),))
    f2 = Atom("q", (const("c"), const("d")))
    p = Problem((LabeledAxiom("a", Role.AXIOM, f1),), LabeledAxiom("g", Role.CONJECTURE, f2))
    with pytest.raises(fol.ArityClash) as e:
        to_tptp(p)
    assert e.value.name == "q"
    assert {e.value.first[0], e.value.second[0]} == {"a", "g"}


def test_mangling_is_injective():
    names = ["Foo", "foo", "'lam_0", "lam_0", "x.y", "nat", "S", "s", "p", "P"]
    m = fol.mangle_names(names, taken=fol.RESERVED.values())
    assert len(set(m.values())) == len(names)
    assert not set(m.values()) & set(fol.RESERVED.values())


def test_parse_szs_examples():
    out = "# SZS status Theorem for goal\ncnf(1, axiom, p(c), file('x.p', a1)).\ncnf(2, x, q, file('x.p', a7)).\n"
    assert parse_szs(out).status is Status.THEOREM
    assert parse_szs(out).used_axioms == ("a1", "a7")
    r = parse_szs("% SZS status CounterSatisfiable for goal")
    assert (r.status, r.used_axioms) == (Status.COUNTER_SATISFIABLE, ())
    assert parse_szs("% SZS status GiveUp").status is Status.GAVE_UP
    assert parse_szs("% SZS status Timeout").status is Status.TIMEOUT
    r = parse_szs("segmentation fault")
    assert r.status is Status.ERROR and r.raw == "segmentation fault"


def test_parse_szs_eprover_transcript():
    transcript = """# SZS status Theorem
# SZS output start CNFRefutation
fof(c_0_0, axiom, (![X1]:(t(X1,nat)=>ap(ap(plus,o),X1)=X1)), file('/tmp/x.p', plus_O_n)).
fof(c_0_1, conjecture, (t(o,nat)), file('/tmp/x.p', goal)).
fof(c_0_2, axiom, t(o,nat), file('/tmp/x.p', 'O')).
# SZS output end CNFRefutation
"""
    r = parse_szs(transcript, labels=["plus_O_n", "'O'", "unused"])
    assert r.used_axioms == ("plus_O_n", "O")


def test_emission_deterministic(env):
    a = to_tptp(translate.build_problem(env, "plus_S_comm"))
    b = to_tptp(translate.build_problem(env, "plus_S_comm"))
    assert a == b


def test_round_trip_corpus(env):
    from tthammer import corpus
    for name in corpus.conjectures(env):
        p = translate.build_problem(env, name)
        text = to_tptp(p)
        back = fol.read_tptp(text)
        mangled = fol.mangle_problem(p)
        assert [a.label for a in back.all()] == [a.label for a in mangled.all()]
        for x, y in zip(back.all(), mangled.all()):
            assert fol.alpha_eq_formula(_right_assoc(x.formula), _right_assoc(y.formula)), name


def _right_assoc(f):
    """Re-associate conjunctions and disjunctions to the right."""
    if isinstance(f, (And, Or)):
        parts = fol._flatten(f)
        out = _right_assoc(parts[-1])
        for x in reversed(parts[:-1]):
            out = type(f)(_right_assoc(x), out)
        return out
    if isinstance(f, Not):
        return Not(_right_assoc(f.body))
    if isinstance(f, (Implies, Iff)):
        return type(f)(_right_assoc(f.left), _right_assoc(f.right))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, _right_assoc(f.body))
    return f


# --------------------------------------------------------------------------
# simplify preserves truth in finite models

def formulas():
    x, y = FVar("x"), FVar("y")
    terms = st.sampled_from([x, y, const("a"), FFun("f", (x,))])
    atoms = st.one_of(
        st.builds(lambda t: Atom("q", (t,)), terms),
        st.builds(Eq, terms, terms),
        st.just(TOP), st.just(BOTTOM),
    )
    return st.recursive(atoms, lambda sub: st.one_of(
        st.builds(Not, sub),
        st.builds(And, sub, sub), st.builds(Or, sub, sub),
        st.builds(Implies, sub, sub), st.builds(Iff, sub, sub),
        st.builds(Forall, st.sampled_from(["x", "y"]), sub),
        st.builds(Exists, st.sampled_from(["x", "y"]), sub),
    ), max_leaves=6)


@settings(max_examples=150, deadline=None)
@given(formulas(), st.integers(1, 3), st.integers(0, 2**16))
def test_simplify_preserves_models(f, size, seed):
    closed = fol.close_formula(f)
    funs, preds = {"a": 0, "f": 1}, {"q": 1}
    models = list(oracle.iter_models(funs, preds, size))
    rng = random.Random(seed)
    for m in rng.sample(models, min(10, len(models))):
        assert oracle.eval_finite_model(closed, m) == oracle.eval_finite_model(simplify(closed), m)
