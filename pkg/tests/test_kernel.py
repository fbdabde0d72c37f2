import pytest
from hypothesis import given, settings, strategies as st

from tthammer import corpus, kernel
from tthammer.kernel import (
    App, Const, Lambda, Pi, PROP, SET, Sort, TYPE, Typing, Var, alpha_eq, free_context, free_vars,
    infer_type, parse_decls, print_decls, sort_of_type_of, subst, whnf,
)


def term(src, known=()):
    return parse_decls(f"(typing it {src})", known)[0].type


def test_parse_typing():
    assert parse_decls("(typing nat (sort type))") == [Typing("nat", TYPE)]


def test_parse_definition():
    (d,) = parse_decls("(definition id (lambda (x (sort prop)) (var x)) (pi (x (sort prop)) (sort prop)))")
    assert d.name == "id"
    assert d.body == Lambda("x", PROP, Var("x"))
    assert d.type == Pi("x", PROP, PROP)


def test_nat_file_round_trip():
    src = (corpus.DATA / "nat.sx").read_text()
    known = corpus.file_declarations()["prelude.sx"]
    decls = parse_decls(src, known)
    assert len(decls) == 9
    again = parse_decls(print_decls(decls), known)
    assert all(kernel.decl_alpha_eq(a, b) for a, b in zip(decls, again, strict=True))


def test_parse_errors():
    with pytest.raises(kernel.ParseError) as e:
        parse_decls("(typing x\n  (sort prop)")
    assert e.value.line >= 1
    with pytest.raises(kernel.DuplicateName):
        parse_decls("(typing x (sort prop)) (typing x (sort prop))")
    with pytest.raises(kernel.UnboundIdentifier):
        parse_decls("(typing x (const y))")
    with pytest.raises(kernel.UnboundIdentifier):
        parse_decls("(typing x (var y))")


def test_subst_examples():
    A = Const("A")
    assert subst(Var("x"), "x", Const("c")) == Const("c")
    assert subst(Lambda("x", A, Var("x")), "x", Const("c")) == Lambda("x", A, Var("x"))
    out = subst(Lambda("y", A, Var("x")), "x", Var("y"))
    assert isinstance(out, Lambda) and out.binder != "y" and out.body == Var("y")


def test_whnf_examples(env):
    A = Const("A")
    assert whnf(env, App(Lambda("x", A, Var("x")), Const("O"))) == Const("O")
    e = env.extended(parse_decls("(definition id5 (lambda (x (const nat)) (var x)) (pi (x (const nat)) (const nat)))",
                                 env.names()))
    assert whnf(e, App(Const("id5"), Const("O"))) == Const("O")
    pi = Pi("x", A, Var("x"))
    assert whnf(env, pi) == pi


def test_whnf_budget():
    omega = Lambda("x", SET, App(Var("x"), Var("x")))
    with pytest.raises(kernel.BudgetExceeded):
        whnf(kernel.Environment(), App(omega, omega), budget=50)


def test_infer_type_examples(env):
    assert infer_type(kernel.Environment(), (), PROP) == TYPE
    assert infer_type(env, (("x", Const("nat")),), Var("x")) == Const("nat")
    plus_oo = App(App(Const("plus"), Const("O")), Const("O"))
    assert whnf(env, infer_type(env, (), plus_oo)) == Const("nat")
    with pytest.raises(kernel.Untypeable):
        infer_type(env, (), App(Const("O"), Const("O")))


def test_sort_of_type_of_examples(env):
    eq = term("(pi (x (const nat)) (app (const eq) (const nat) (var x) (var x)))", env.names())
    assert sort_of_type_of(env, (), eq) is Sort.PROP
    assert sort_of_type_of(env, (), Const("nat")) is Sort.SET
    assert sort_of_type_of(env, (), Const("O")) is None
    assert sort_of_type_of(env, (), App(Const("O"), Const("O"))) is None


def test_free_vars_order():
    assert free_vars(Lambda("x", Var("a"), App(Var("x"), Var("y")))) == ["a", "y"]
    assert free_vars(Var("x")) == ["x"]
    assert free_vars(Pi("x", Const("nat"), App(Var("x"), Var("x")))) == []


def test_free_context_examples():
    nat, b = Const("nat"), Const("bool")
    assert free_context((), Var("x")) == ()
    assert free_context((("x", nat),), Var("x")) == (("x", nat),)
    assert free_context((("x", nat), ("y", b)), Var("x")) == (("x", nat),)
    dep = (("A", SET), ("x", Var("A")), ("y", b))
    assert free_context(dep, Var("x")) == (("A", SET), ("x", Var("A")))


# --------------------------------------------------------------------------
# properties over small random terms

NAMES = ["x", "y", "z"]
CONSTS = ["c", "d", "f"]


def terms(depth=3):
    leaf = st.one_of(st.sampled_from(NAMES).map(Var), st.sampled_from(CONSTS).map(Const), st.just(PROP))
    return st.recursive(leaf, lambda sub: st.one_of(
        st.builds(App, sub, sub),
        st.builds(Lambda, st.sampled_from(NAMES), sub, sub),
        st.builds(Pi, st.sampled_from(NAMES), sub, sub),
    ), max_leaves=8)


def rename_bound(t, suffix="'"):
    """An alpha-variant of ``t`` with every binder renamed."""
    if isinstance(t, App):
        return App(rename_bound(t.fn, suffix), rename_bound(t.arg, suffix))
    if isinstance(t, (Lambda, Pi)):
        new = t.binder + suffix
        body = subst(rename_bound(t.body, suffix), t.binder, Var(new))
        return type(t)(new, rename_bound(t.binder_type, suffix), body)
    return t


@settings(max_examples=200, deadline=None)
@given(terms(), terms(), st.sampled_from(NAMES))
def test_subst_alpha_invariant(t, u, x):
    t2 = rename_bound(t)
    assert alpha_eq(t, t2)
    assert alpha_eq(subst(t, x, u), subst(t2, x, u))
    assert free_vars(t) == free_vars(t2)


@settings(max_examples=200, deadline=None)
@given(terms(), terms(), st.sampled_from(NAMES))
def test_subst_free_vars(t, u, x):
    fv = set(free_vars(subst(t, x, u)))
    assert fv <= (set(free_vars(t)) - {x}) | set(free_vars(u))


@settings(max_examples=200, deadline=None)
@given(terms(), terms(), terms())
def test_subst_composition(t, u, v):
    x, y = "x", "y"
    if x in free_vars(v):
        return
    left = subst(subst(t, x, u), y, v)
    right = subst(subst(t, y, v), x, subst(u, y, v))
    assert alpha_eq(left, right)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), unique=True), st.data())
def test_free_context_is_ordered_sublist(names, data):
    ctx = tuple((n, Const("nat")) for n in names)
    used = data.draw(st.lists(st.sampled_from(names), max_size=3)) if names else []
    t = Const("c")
    for n in used:
        t = App(t, Var(n))
    out = free_context(ctx, t)
    it = iter(ctx)
    assert all(entry in it for entry in out)
    assert {n for n, _ in out} == set(used)


def test_sort_stable_under_whnf(env):
    for d in env.decls:
        ty = d.arity if isinstance(d, kernel.Inductive) else d.type
        try:
            w = whnf(env, ty)
        except kernel.BudgetExceeded:
            continue
        assert sort_of_type_of(env, (), ty) == sort_of_type_of(env, (), w)
