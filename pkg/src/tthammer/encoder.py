"""Encoding of core-calculus terms into untyped first-order logic.

Three mutually recursive functions do the work:

* :func:`encode_prop` turns a proposition into a formula,
* :func:`encode_guard` turns a type and an inhabitant into a guard formula
  saying the inhabitant has that type,
* :func:`encode_term` turns a term into a first-order term, lifting
  products, lambda abstractions and case expressions out into fresh
  constants with defining axioms.

Proof arguments and proof binders are erased throughout (proof
irrelevance).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import fol
from .fol import (
    And, Atom, Eq, Exists, FFun, Forall, Formula, FolTerm, FVar, Iff, Implies, LabeledAxiom, Not,
    Problem, Role, ap, conj, const, disj, prf, typed,
)
from .kernel import (
    App, BudgetExceeded, Case, Const, Context, Environment, Lambda, Pi, Sort, SortT, Term,
    Untypeable, Var, free_context, free_vars, fresh_name, is_proof,
    sort_of_type_of, spine, subst, telescope,
)

# Constants of the standard logical inductives, mapped to native connectives
# when fully applied.
DEFAULT_LOGIC = {
    "True": "True",
    "False": "False",
    "not": "not",
    "and": "and",
    "or": "or",
    "iff": "iff",
    "ex": "ex",
    "eq": "eq",
}

SORT_MARKERS = {Sort.PROP: "'Prop", Sort.SET: "'Set", Sort.TYPE: "'Type"}

_PLACEHOLDER = "'?"


@dataclass
class EncoderState:
    """Per-run state: fresh-symbol counters and the lifted-axiom accumulator."""

    env: Environment
    logic: dict[str, str] = field(default_factory=lambda: dict(DEFAULT_LOGIC))
    axioms: list[LabeledAxiom] = field(default_factory=list)
    counters: dict[str, int] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    source: str = ""
    _lifted: dict = field(default_factory=dict)

    def fresh(self, kind: str) -> str:
        n = self.counters.get(kind, 0)
        self.counters[kind] = n + 1
        return f"'{kind}_{n}"

    def drain(self) -> list[LabeledAxiom]:
        out, self.axioms = self.axioms, []
        return out

    def diag(self, message: str) -> None:
        where = f"{self.source}: " if self.source else ""
        self.diagnostics.append(where + message)


def _is_prop(st: EncoderState, ctx: Context, t: Term) -> bool:
    return sort_of_type_of(st.env, ctx, t) is Sort.PROP


def _is_proof_var(st: EncoderState, ctx: Context, name: str) -> bool:
    for n, ty in reversed(ctx):
        if n == name:
            idx = [m for m, _ in ctx].index(n)
            return _is_prop(st, ctx[:idx], ty)
    return False


def _open(ctx: Context, t: Lambda | Pi, avoid: set[str] = frozenset()) -> tuple[Context, str, Term]:
    """Push the binder of ``t`` onto ``ctx``; renames away from ctx and ``avoid``."""
    taken = {n for n, _ in ctx} | set(avoid)
    x, body = t.binder, t.body
    if x in taken:
        new = fresh_name(x, taken | set(free_vars(body)))
        body = subst(body, x, Var(new))
        x = new
    return ctx + ((x, t.binder_type),), x, body


def _fresh_var(base: str, ctx: Context, avoid: set[str] = frozenset()) -> str:
    return fresh_name(base, {n for n, _ in ctx} | set(avoid))


# --------------------------------------------------------------------------
# Propositions


def encode_prop(st: EncoderState, ctx: Context, t: Term) -> Formula:
    native = _logical(st, ctx, t)
    if native is not None:
        return native
    if isinstance(t, Pi):
        ctx2, x, body = _open(ctx, t)
        if _is_prop(st, ctx, t.binder_type):
            return Implies(encode_prop(st, ctx, t.binder_type), encode_prop(st, ctx2, body))
        return Forall(x, Implies(encode_guard(st, ctx, t.binder_type, FVar(x)),
                                 encode_prop(st, ctx2, body)))
    if not _is_prop(st, ctx, t):
        st.diag("proposition expected; encoding as P(term)")
    return prf(encode_term(st, ctx, t))


def _logical(st: EncoderState, ctx: Context, t: Term) -> Formula | None:
    head, args = spine(t)
    if not isinstance(head, Const):
        return None
    role = {v: k for k, v in st.logic.items()}.get(head.name)
    arity = {"True": 0, "False": 0, "not": 1, "and": 2, "or": 2, "iff": 2, "ex": 2, "eq": 3}
    if role is None or len(args) != arity[role]:
        return None
    if role == "True":
        return fol.TOP
    if role == "False":
        return fol.BOTTOM
    if role == "not":
        return Not(encode_prop(st, ctx, args[0]))
    if role in ("and", "or", "iff"):
        cls = {"and": And, "or": Or_, "iff": Iff}[role]
        return cls(encode_prop(st, ctx, args[0]), encode_prop(st, ctx, args[1]))
    if role == "eq":
        return Eq(encode_term(st, ctx, args[1]), encode_term(st, ctx, args[2]))
    # ex A P
    dom, pred = args
    if isinstance(pred, Lambda):
        ctx2, x, body = _open(ctx, pred)
    else:
        x = _fresh_var("x", ctx, set(free_vars(pred)))
        ctx2, body = ctx + ((x, dom),), App(pred, Var(x))
    if _is_prop(st, ctx, dom):
        return And(encode_prop(st, ctx, dom), encode_prop(st, ctx2, body))
    return Exists(x, And(encode_guard(st, ctx, dom, FVar(x)), encode_prop(st, ctx2, body)))


Or_ = fol.Or


# --------------------------------------------------------------------------
# Guards


def encode_guard(st: EncoderState, ctx: Context, ty: Term, subject: FolTerm) -> Formula:
    if isinstance(ty, Pi):
        avoid = set(fol.term_vars(subject))
        ctx2, x, body = _open(ctx, ty, avoid)
        if _is_prop(st, ctx, ty.binder_type):
            return Implies(encode_prop(st, ctx, ty.binder_type), encode_guard(st, ctx2, body, subject))
        return Forall(x, Implies(encode_guard(st, ctx, ty.binder_type, FVar(x)),
                                 encode_guard(st, ctx2, body, ap(subject, FVar(x)))))
    return typed(subject, encode_term(st, ctx, ty))


# --------------------------------------------------------------------------
# Terms


def encode_term(st: EncoderState, ctx: Context, t: Term) -> FolTerm:
    if isinstance(t, Var):
        return FVar(t.name)
    if isinstance(t, Const):
        return const(t.name)
    if isinstance(t, SortT):
        return const(SORT_MARKERS[t.sort])
    if isinstance(t, App):
        if is_proof(st.env, ctx, t.arg):
            return encode_term(st, ctx, t.fn)
        return ap(encode_term(st, ctx, t.fn), encode_term(st, ctx, t.arg))
    if isinstance(t, Pi):
        return _lift_pi(st, ctx, t)
    if isinstance(t, Lambda):
        return _lift_lambda(st, ctx, t)
    if isinstance(t, Case):
        return _lift_case(st, ctx, t)
    raise TypeError(t)


def _data_vars(st: EncoderState, ctx: Context, names) -> list[str]:
    return [y for y in names if not _is_proof_var(st, ctx, y)]


def _register(st: EncoderState, kind: str, ys: list[str], axiom: Formula) -> FolTerm:
    """Name a lifted symbol, reusing an earlier one with the same axiom."""
    key = (kind, tuple(ys), axiom)
    name = st._lifted.get(key)
    if name is None:
        name = st.fresh(kind)
        st._lifted[key] = name
        formula = _rename_symbol(axiom, _PLACEHOLDER, name)
        loose = fol.formula_free_vars(formula)
        if loose:
            st.diag(f"lifted axiom {name} had free variables {loose}; closed universally")
            formula = fol.forall(loose, formula)
        st.axioms.append(LabeledAxiom(name, Role.LIFTED, formula, st.source, "lifted"))
    return ap(const(name), *[FVar(y) for y in ys])


def _opaque(st: EncoderState, ctx: Context, t: Term, why: str) -> FolTerm:
    st.diag(f"{why}; using an opaque constant")
    ys = _data_vars(st, ctx, free_vars(t))
    return ap(const(st.fresh("opaque")), *[FVar(y) for y in ys])


def _lift_pi(st: EncoderState, ctx: Context, t: Pi) -> FolTerm:
    ys = _data_vars(st, ctx, free_vars(t))
    head = ap(const(_PLACEHOLDER), *[FVar(y) for y in ys])
    if _is_prop(st, ctx, t):
        body = Iff(prf(head), encode_prop(st, ctx, t))
    else:
        z = _fresh_var("z", ctx, set(ys))
        body = Forall(z, Iff(typed(FVar(z), head), encode_guard(st, ctx, t, FVar(z))))
    return _register(st, "pi", ys, fol.forall(ys, body))


def _lift_lambda(st: EncoderState, ctx: Context, t: Lambda) -> FolTerm:
    ys = _data_vars(st, ctx, free_vars(t))
    binders: list[tuple[str, Term, Context]] = []
    inner, body = ctx, t
    while isinstance(body, Lambda):
        before = inner
        inner, x, body = _open(inner, body)
        binders.append((x, inner[-1][1], before))
    xs = [x for x, ty, before in binders if not _is_prop(st, before, ty)]
    lhs = ap(const(_PLACEHOLDER), *[FVar(y) for y in ys + xs])
    try:
        body_is_prop = _is_prop(st, inner, body)
    except (Untypeable, BudgetExceeded):
        body_is_prop = False
    if body_is_prop:
        core: Formula = Iff(prf(lhs), encode_prop(st, inner, body))
    else:
        core = Eq(lhs, encode_term(st, inner, body))
    for x, ty, before in reversed(binders):
        if _is_prop(st, before, ty):
            core = Implies(encode_prop(st, before, ty), core)
        else:
            core = Forall(x, Implies(encode_guard(st, before, ty, FVar(x)), core))
    return _register(st, "lam", ys, fol.forall(ys, core))


def _lift_case(st: EncoderState, ctx: Context, t: Case) -> FolTerm:
    env = st.env
    ind = env.inductive(t.ind)
    if ind is None or len(ind.constructors) != len(t.branches):
        return _opaque(st, ctx, t, f"case over unknown or mismatched inductive {t.ind}")
    scrut = t.scrutinee
    ctx2 = free_context(ctx, scrut)
    rest: Term = _apply(scrut, t.branches)
    for y, rho in reversed(ctx2):
        rest = Lambda(y, rho, rest)
    ctx1 = free_context(ctx, rest)
    y1 = _data_vars(st, ctx, [y for y, _ in ctx1])
    y2 = _data_vars(st, ctx, [y for y, _ in ctx2])
    lhs = ap(const(_PLACEHOLDER), *[FVar(y) for y in y1 + y2])
    scrut_is_proof = is_proof(env, ctx, scrut)
    scrut_term = None if scrut_is_proof else encode_term(st, ctx, scrut)

    disjuncts = []
    used = {n for n, _ in ctx}
    for (cname, ctype), branch in zip(ind.constructors, t.branches):
        pis, _ = telescope(ctype)
        params, cargs = pis[:t.n_params], pis[t.n_params:]
        # parameters, existentially quantified under fresh names
        zctx, zs = ctx, []
        pctype = ctype
        for _ in params:
            zctx, z, pctype = _open(zctx, pctype, used)
            used.add(z)
            zs.append((z, zctx[-1][1], zctx[:-1]))
        # constructor arguments, named by the branch binders
        bctx, body, xs = zctx, branch, []
        for _ in cargs:
            if not isinstance(body, Lambda):
                return _opaque(st, ctx, t, f"branch for {cname} is not a lambda telescope")
            before = bctx
            bctx, x, body = _open(bctx, body, used)
            used.add(x)
            xs.append((x, bctx[-1][1], before))
        parts: list[Formula] = []
        bound: list[str] = []
        for z, ty, before in zs:
            if _is_prop(st, before, ty):
                parts.append(encode_prop(st, before, ty))
            else:
                bound.append(z)
                parts.append(encode_guard(st, before, ty, FVar(z)))
        ctor_args = []
        for x, ty, before in xs:
            if _is_prop(st, before, ty):
                parts.append(encode_prop(st, before, ty))
            else:
                bound.append(x)
                ctor_args.append(FVar(x))
                parts.append(encode_guard(st, before, ty, FVar(x)))
        if scrut_term is not None:
            zterms = [FVar(z) for z, ty, before in zs if not _is_prop(st, before, ty)]
            parts.append(Eq(scrut_term, ap(const(cname), *zterms, *ctor_args)))
        if _is_prop(st, bctx, body):
            parts.append(Iff(prf(lhs), encode_prop(st, bctx, body)))
        else:
            parts.append(Eq(lhs, encode_term(st, bctx, body)))
        disjuncts.append(fol.exists(bound, conj(parts)))

    core = disj(disjuncts)
    for y, rho in reversed(ctx2):
        before = ctx[:[n for n, _ in ctx].index(y)]
        if _is_prop(st, before, rho):
            core = Implies(encode_prop(st, before, rho), core)
        else:
            core = Forall(y, Implies(encode_guard(st, before, rho, FVar(y)), core))
    return _register(st, "case", y1 + y2, fol.forall(y1, core))


def _apply(head: Term, args) -> Term:
    for a in args:
        head = App(head, a)
    return head


def _rename_symbol(f: Formula, old: str, new: str) -> Formula:
    def rt(t: FolTerm) -> FolTerm:
        if isinstance(t, FVar):
            return t
        return FFun(new if t.name == old else t.name, tuple(rt(a) for a in t.args))

    def rf(g: Formula) -> Formula:
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(rt(a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(rt(g.left), rt(g.right))
        if isinstance(g, (fol.Top, fol.Bottom)):
            return g
        if isinstance(g, Not):
            return Not(rf(g.body))
        if isinstance(g, fol.BINARY):
            return type(g)(rf(g.left), rf(g.right))
        return type(g)(g.var, rf(g.body))

    return rf(f)


# --------------------------------------------------------------------------
# Arity optimisation


def _spine(t: FolTerm) -> tuple[FolTerm, list[FolTerm]]:
    args = []
    while isinstance(t, FFun) and t.name == fol.AP and len(t.args) == 2:
        args.append(t.args[1])
        t = t.args[0]
    args.reverse()
    return t, args


def _is_symbol(t: FolTerm) -> bool:
    return isinstance(t, FFun) and not t.args and t.name not in SORT_MARKERS.values()


def _collect_sites(f: Formula, term_sites: dict, pred_sites: dict) -> None:
    def term(t: FolTerm, top_of_p: bool = False) -> None:
        if isinstance(t, FVar):
            return
        head, args = _spine(t)
        if _is_symbol(head):
            sites = pred_sites if top_of_p else term_sites
            sites.setdefault(head.name, set()).add(len(args))
            for a in args:
                term(a)
            return
        if head is not t:
            term(head)
            for a in args:
                term(a)
            return
        for a in t.args:
            term(a)

    def go(g: Formula) -> None:
        if isinstance(g, Atom):
            if g.pred == fol.P and len(g.args) == 1:
                term(g.args[0], top_of_p=True)
            else:
                for a in g.args:
                    term(a)
        elif isinstance(g, Eq):
            term(g.left)
            term(g.right)
        elif isinstance(g, Not):
            go(g.body)
        elif isinstance(g, fol.BINARY):
            go(g.left)
            go(g.right)
        elif isinstance(g, fol.QUANT):
            go(g.body)

    go(f)


def arity_optimize(p: Problem) -> Problem:
    """Uncurry consistently applied constants.

    A constant applied to at most ``n`` arguments through ``@`` chains gets
    an ``n``-ary function symbol ``'f_n`` at its ``n``-argument sites; when
    it is the whole argument of ``P`` it becomes the predicate ``'f_pn``.
    Sites with fewer arguments stay curried and a bridging axiom relates the
    two forms.
    """
    term_sites: dict[str, set[int]] = {}
    pred_sites: dict[str, set[int]] = {}
    for f in p.formulas():
        _collect_sites(f, term_sites, pred_sites)

    pred_map: dict[str, int] = {}
    fun_map: dict[str, int] = {}
    bridges: list[LabeledAxiom] = []
    for name in sorted(pred_sites):
        n = max(pred_sites[name])
        if n >= 1:
            pred_map[name] = n
    for name in sorted(term_sites):
        n = max(term_sites[name])
        if n >= 1:
            fun_map[name] = n

    def fun_name(name: str, n: int) -> str:
        return f"'{name.lstrip(chr(39))}_{n}"

    def pred_name(name: str, n: int) -> str:
        return f"'{name.lstrip(chr(39))}_p{n}"

    def rt(t: FolTerm) -> FolTerm:
        if isinstance(t, FVar):
            return t
        head, args = _spine(t)
        if head is t:
            return FFun(t.name, tuple(rt(a) for a in t.args))
        args = [rt(a) for a in args]
        if _is_symbol(head) and fun_map.get(head.name) == len(args):
            return FFun(fun_name(head.name, len(args)), tuple(args))
        return ap(rt(head), *args)

    def rf(g: Formula) -> Formula:
        if isinstance(g, Atom):
            if g.pred == fol.P and len(g.args) == 1:
                head, args = _spine(g.args[0])
                if _is_symbol(head) and pred_map.get(head.name) == len(args) and args:
                    return Atom(pred_name(head.name, len(args)), tuple(rt(a) for a in args))
            return Atom(g.pred, tuple(rt(a) for a in g.args))
        if isinstance(g, Eq):
            return Eq(rt(g.left), rt(g.right))
        if isinstance(g, (fol.Top, fol.Bottom)):
            return g
        if isinstance(g, Not):
            return Not(rf(g.body))
        if isinstance(g, fol.BINARY):
            return type(g)(rf(g.left), rf(g.right))
        return type(g)(g.var, rf(g.body))

    def curried(name: str, n: int) -> tuple[list[str], FolTerm]:
        xs = [f"X{i}" for i in range(n)]
        t: FolTerm = const(name)
        for x in xs:
            t = FFun(fol.AP, (t, FVar(x)))
        return xs, t

    for name, n in sorted(pred_map.items()):
        mixed = pred_sites[name] != {n} or name in term_sites
        if mixed:
            xs, t = curried(name, n)
            lhs = Atom(pred_name(name, n), tuple(FVar(x) for x in xs))
            bridges.append(LabeledAxiom(f"{pred_name(name, n)}_bridge", Role.DEFINITION,
                                        fol.forall(xs, Iff(lhs, prf(t))), name, "bridge"))
    for name, n in sorted(fun_map.items()):
        mixed = term_sites[name] != {n} or name in pred_sites or any(
            b.source == name for b in bridges)
        if mixed:
            xs, t = curried(name, n)
            lhs = FFun(fun_name(name, n), tuple(FVar(x) for x in xs))
            bridges.append(LabeledAxiom(f"{fun_name(name, n)}_bridge", Role.DEFINITION,
                                        fol.forall(xs, Eq(lhs, t)), name, "bridge"))

    def ra(a: LabeledAxiom) -> LabeledAxiom:
        return LabeledAxiom(a.label, a.role, rf(a.formula), a.source, a.kind)

    return Problem(tuple(ra(a) for a in p.axioms) + tuple(bridges), ra(p.conjecture))
