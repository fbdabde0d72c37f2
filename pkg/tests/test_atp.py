import random
import sys
from pathlib import Path

from hypothesis import given, settings, strategies as st

from tthammer import atp, corpus, fol, oracle, translate
from tthammer.atp import Clause, Limits, clausify, saturate
from tthammer.fol import (
    Atom, Exists, FVar, Forall, LabeledAxiom, Problem, Role, Status, const,
)

SHIM = Path(__file__).parent / "szs_shim.py"


def problem(axioms, goal):
    return Problem(tuple(LabeledAxiom(f"a{i + 1}", Role.AXIOM, f) for i, f in enumerate(axioms)),
                   LabeledAxiom("goal", Role.CONJECTURE, goal))


def P(name, *args):
    return Atom(name, tuple(args))


def test_clausify_unit_conflict():
    c = const("c")
    cls = clausify(problem([P("p", c)], P("p", c)))
    assert {str(x) for x in cls} == {"p(c)", "~p(c)"}


def test_clausify_skolemizes():
    x, y = FVar("x"), FVar("y")
    (cl,) = atp.clausify_formula(Forall("x", Exists("y", P("r", x, y))))
    assert str(cl) == "r(X0,'sk_1(X0))"


def test_saturate_examples():
    c = const("c")
    x = FVar("x")
    r = saturate(clausify(problem([P("p", c)], P("p", c))))
    assert r.outcome == "proof" and r.used_labels == {"a1", "goal"}
    cls = clausify(problem([Forall("x", fol.Implies(P("p", x), P("q", x))), P("p", c)], P("q", c)))
    r = saturate(cls)
    assert r.outcome == "proof" and r.used_labels == {"a1", "a2", "goal"}
    r = saturate(clausify(problem([P("p", c)], P("q", const("d")))))
    assert r.outcome == "saturated"


def test_prove_builtin_statuses():
    c = const("c")
    assert atp.prove_builtin(problem([P("p", c)], P("p", c))).status is Status.THEOREM
    assert atp.prove_builtin(problem([P("p", c)], P("q", c))).status is Status.COUNTER_SATISFIABLE
    assert atp.prove_builtin(problem([P("p", c)], P("p", c)), timeout=0).status is Status.TIMEOUT


def test_used_labels_suffice(env):
    """Re-proving from only the cited axioms succeeds (no minimality claimed)."""
    for name in ["plus_O_n", "le_n_Sn", "contrapos", "negb_true"]:
        p = translate.build_problem(env, name)
        r = atp.prove_builtin(p, timeout=30)
        assert r.status is Status.THEOREM
        q = Problem(tuple(a for a in p.axioms if a.label in r.used_axioms), p.conjecture)
        assert atp.prove_builtin(q, timeout=30).status is Status.THEOREM


def test_run_external_missing_binary(env):
    p = translate.build_problem(env, "and_comm")
    r = atp.run_external(p, "no-such-prover-binary {file}", timeout=5)
    assert (r.status, r.error) == (Status.ERROR, "SpawnFailed")


def test_run_external_zero_timeout(env):
    p = translate.build_problem(env, "and_comm")
    assert atp.run_external(p, f"{sys.executable} {SHIM} {{file}}", timeout=0).status is Status.TIMEOUT


def test_run_external_shim_round_trip(env):
    p = translate.build_problem(env, "plus_O_n")
    r = atp.run_external(p, f"{sys.executable} {SHIM} {{file}} {{t}}", timeout=60)
    assert r.status is Status.THEOREM
    assert set(r.used_axioms) <= set(p.labels()) and r.used_axioms


# --------------------------------------------------------------------------
# soundness: a refutation means there is no small model

def clause_sets():
    terms = st.sampled_from([0, 1, ("a",), ("b",), ("f", 0), ("f", ("a",))])
    lit = st.tuples(st.booleans(), st.sampled_from(["p", "q"]), st.tuples(terms))
    return st.lists(st.lists(lit, min_size=1, max_size=3).map(lambda ls: Clause(tuple(ls), frozenset(["x"]))),
                    min_size=1, max_size=6)


@settings(max_examples=150, deadline=None)
@given(clause_sets())
def test_refutation_means_no_small_model(clauses):
    r = saturate(clauses, Limits(max_seconds=5))
    if r.outcome == "proof":
        fs = [atp.clause_formula(c) for c in clauses]
        assert not any(oracle.satisfiable(fs, n) for n in (1, 2, 3))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32))
def test_clausify_equisatisfiable_random(seed):
    rng = random.Random(seed)
    formulas = list(oracle.enumerate_closed_formulas(max_connectives=1, max_quantifiers=2))
    f = rng.choice(formulas)
    clauses = [atp.clause_formula(c) for c in atp.clausify_formula(f)]
    for n in (1, 2, 3):
        assert oracle.satisfiable([f], n) == oracle.satisfiable(clauses, n)


def test_designated_builtin_quick(env):
    for name in ["and_comm", "iff_refl", "double_O"]:
        assert atp.prove_builtin(translate.build_problem(env, name), timeout=30).status is Status.THEOREM
    assert corpus.designated()
