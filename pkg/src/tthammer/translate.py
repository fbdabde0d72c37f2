"""Declaration-level translation and problem assembly."""

from __future__ import annotations

from typing import Iterable, Sequence

from . import fol
from .encoder import EncoderState, arity_optimize, encode_guard, encode_prop, encode_term
from .fol import Eq, FVar, Iff, LabeledAxiom, Not, Problem, Role, ap, const
from .kernel import (
    Const, Context, Declaration, Definition, Environment, Inductive, Pi, Sort, SortT, Term,
    Typing, apply, constants, declared_names, fresh_name, sort_of_type_of, spine, subst,
    telescope, Var,
)


class NonTelescopeConstructor(ValueError):
    pass


class UnknownName(KeyError):
    pass


ALL = "ALL"


def _axiom(label: str, formula: fol.Formula, source: str, kind: str,
           role: Role = Role.AXIOM) -> LabeledAxiom:
    return LabeledAxiom(label, role, fol.simplify(formula), source, kind)


def _kind(env: Environment, ty: Term) -> Sort | None:
    return sort_of_type_of(env, (), ty)


def translate_typing(st: EncoderState, d: Typing) -> list[LabeledAxiom]:
    st.source = d.name
    if _kind(st.env, d.type) is Sort.PROP:
        return [_axiom(d.name, encode_prop(st, (), d.type), d.name, "lemma")]
    return [_axiom(d.name, encode_guard(st, (), d.type, const(d.name)), d.name, "typing")]


def translate_definition(st: EncoderState, d: Definition) -> list[LabeledAxiom]:
    st.source = d.name
    if _kind(st.env, d.type) is Sort.PROP:
        return [_axiom(d.name, encode_prop(st, (), d.type), d.name, "lemma")]
    c = const(d.name)
    out = [_axiom(f"{d.name}_type", encode_guard(st, (), d.type, c), d.name, "typing")]
    ty = d.type
    if isinstance(ty, SortT) and ty.sort is Sort.PROP:
        body = Iff(fol.prf(c), encode_prop(st, (), d.body))
    elif isinstance(ty, SortT):
        f = "F"
        body = fol.Forall(f, Iff(fol.typed(FVar(f), c), encode_guard(st, (), d.body, FVar(f))))
    else:
        body = Eq(c, encode_term(st, (), d.body))
    out.append(_axiom(d.name, body, d.name, "definition", Role.DEFINITION))
    return out


def _split_constructor(ind: Inductive, cname: str, ctype: Term,
                       params: Sequence[str]) -> tuple[list[tuple[str, Term]], list[Term]]:
    """Arguments (after the parameters, renamed to ``params``) and result indices."""
    t = ctype
    for p in params:
        if not isinstance(t, Pi):
            raise NonTelescopeConstructor(f"{cname}: fewer than {ind.n_params} parameters")
        t = subst(t.body, t.binder, Var(p))
    args = []
    taken = set(params)
    while isinstance(t, Pi):
        x = t.binder if t.binder not in taken else fresh_name(t.binder, taken)
        body = subst(t.body, t.binder, Var(x)) if x != t.binder else t.body
        taken.add(x)
        args.append((x, t.binder_type))
        t = body
    head, rargs = spine(t)
    if not (isinstance(head, Const) and head.name == ind.name and len(rargs) >= ind.n_params):
        raise NonTelescopeConstructor(f"{cname}: result is not an application of {ind.name}")
    return args, rargs[ind.n_params:]


def _bind_args(st: EncoderState, ctx: Context, args, rename: dict[str, str] | None = None):
    """Guards for constructor arguments: (data vars, guard/premise formulas, ctx)."""
    data, parts = [], []
    for x, ty in args:
        if rename:
            for old, new in rename.items():
                ty = subst(ty, old, Var(new))
            x = rename.get(x, x)
        if sort_of_type_of(st.env, ctx, ty) is Sort.PROP:
            parts.append(encode_prop(st, ctx, ty))
        else:
            data.append(x)
            parts.append(encode_guard(st, ctx, ty, FVar(x)))
        ctx = ctx + ((x, ty),)
    return data, parts, ctx


def translate_inductive(st: EncoderState, d: Inductive) -> list[LabeledAxiom]:
    out = translate_typing(st, Typing(d.name, d.arity))
    for cname, ctype in d.constructors:
        out += translate_typing(st, Typing(cname, ctype))
    st.source = d.name

    arity_binders, sort = telescope(d.arity)
    if len(arity_binders) < d.n_params or not isinstance(sort, SortT):
        raise NonTelescopeConstructor(f"{d.name}: arity is not a telescope over a sort")

    # parameters and indices, named after the arity's binders
    taken: set[str] = set()
    names = []
    for b, _ in arity_binders:
        n = fresh_name(b, taken) if b in taken or b == "_" else b
        taken.add(n)
        names.append(n)
    pctx: Context = ()
    binders = []
    for (b, ty), n in zip(arity_binders, names):
        ty = _rename_all(ty, arity_binders, names, upto=len(binders))
        binders.append((n, ty))
    params = [n for n, _ in binders[:d.n_params]]
    indices = binders[d.n_params:]
    for n, ty in binders[:d.n_params]:
        pctx = pctx + ((n, ty),)
    pdata, pguards, _ = _bind_args(st, (), binders[:d.n_params])
    p_terms = [FVar(p) for p in pdata]

    ctors = []
    for cname, ctype in d.constructors:
        args, res_indices = _split_constructor(d, cname, ctype, params)
        ctors.append((cname, args, res_indices))

    is_prop_family = sort.sort is Sort.PROP

    if not is_prop_family:
        # injectivity
        for cname, args, _ in ctors:
            xs, _, _ = _bind_args(st, pctx, args)
            if not xs:
                continue
            used = set(params) | {x for x, _ in args}
            ys = []
            for x in xs:
                y = fresh_name(x, used)
                used.add(y)
                ys.append(y)
            lhs = Eq(ap(const(cname), *p_terms, *map(FVar, xs)), ap(const(cname), *p_terms, *map(FVar, ys)))
            rhs = fol.conj(Eq(FVar(x), FVar(y)) for x, y in zip(xs, ys))
            f = fol.forall(pdata + xs + ys, fol.Implies(lhs, rhs))
            out.append(_axiom(f"{d.name}_inj_{cname}", f, d.name, "injectivity"))
        # discrimination
        for i in range(len(ctors)):
            for j in range(i + 1, len(ctors)):
                ci, ai, _ = ctors[i]
                cj, aj, _ = ctors[j]
                xs, _, _ = _bind_args(st, pctx, ai)
                used = set(params) | set(xs)
                ren = {}
                for x, _ in aj:
                    y = fresh_name(x, used) if x in used else x
                    used.add(y)
                    ren[x] = y
                ys, _, _ = _bind_args(st, pctx, aj, ren)
                f = Not(Eq(ap(const(ci), *p_terms, *map(FVar, xs)), ap(const(cj), *p_terms, *map(FVar, ys))))
                out.append(_axiom(f"{d.name}_discr_{ci}_{cj}", fol.forall(pdata + xs + ys, f),
                                  d.name, "discrimination"))

    if d.name in st.logic.values():
        # mapped to native connectives; the inversion would be a tautology
        return out

    # inversion
    ictx = pctx
    idata, iguards, ictx = _bind_args(st, pctx, indices)
    used = {n for n, _ in binders}
    family = apply(Const(d.name), [Var(n) for n, _ in binders])
    z = fresh_name("z", used)
    used.add(z)
    disjuncts = []
    for cname, args, res_indices in ctors:
        ren = {}
        for x, _ in args:
            y = fresh_name(x, used) if x in used else x
            used.add(y)
            ren[x] = y
        xs, parts, _ = _bind_args(st, pctx, args, ren)
        for (u, _), v in zip(indices, res_indices):
            for old, new in ren.items():
                v = subst(v, old, Var(new))
            parts.append(Eq(FVar(u), encode_term(st, pctx + tuple((ren.get(x, x), ty) for x, ty in args), v)))
        if not is_prop_family:
            parts.append(Eq(FVar(z), ap(const(cname), *p_terms, *map(FVar, xs))))
        disjuncts.append(fol.exists(xs, fol.conj(parts)))
    if is_prop_family:
        head = encode_prop(st, ictx, family)
        core = fol.Implies(head, fol.disj(disjuncts))
    else:
        head = encode_guard(st, ictx, family, FVar(z))
        core = fol.Forall(z, fol.Implies(head, fol.disj(disjuncts)))
    for g in reversed(pguards + iguards):
        core = fol.Implies(g, core)
    inv = fol.forall(pdata + idata, core)
    out.append(_axiom(f"{d.name}_inv", inv, d.name, "inversion"))
    return out


def _rename_all(ty: Term, binders, names, upto: int) -> Term:
    for (b, _), n in list(zip(binders, names))[:upto]:
        if b != n:
            ty = subst(ty, b, Var(n))
    return ty


def translate_decl(st: EncoderState, d: Declaration) -> list[LabeledAxiom]:
    if isinstance(d, Definition):
        main = translate_definition(st, d)
    elif isinstance(d, Typing):
        main = translate_typing(st, d)
    else:
        main = translate_inductive(st, d)
    return [a for a in main + st.drain() if not isinstance(a.formula, fol.Top)]


# --------------------------------------------------------------------------
# Dependencies


def _block(env: Environment, name: str) -> tuple[str, ...]:
    return declared_names(env.owner(name))


def _decl_constants(env: Environment, name: str, with_body: bool) -> list[str]:
    d = env.owner(name)
    terms: list[Term] = []
    if isinstance(d, Inductive):
        terms = [d.arity] + [ty for _, ty in d.constructors]
    else:
        terms = [d.type]
        if isinstance(d, Definition) and (with_body or _kind(env, d.type) is not Sort.PROP):
            terms.append(d.body)
    out: dict[str, None] = {}
    for t in terms:
        for c in constants(t):
            if c in env:
                out.setdefault(c)
    return list(out)


def extended_deps(env: Environment, roots: Iterable[str], depth: int = 2) -> set[str]:
    """Constants reachable from ``roots``.

    Level 0 collects constants in the roots' types and bodies (proof bodies
    included); each further level adds constants of the frontier's types
    and non-proof definition bodies.  Inductive blocks are kept whole.
    """
    roots = list(roots)
    for r in roots:
        if r not in env:
            raise UnknownName(r)

    def close(names: Iterable[str]) -> set[str]:
        out = set()
        for n in names:
            out.update(_block(env, n))
        return out

    result = close(roots)
    frontier: set[str] = set()
    for r in roots:
        frontier.update(_decl_constants(env, r, with_body=True))
    frontier = close(frontier) - result
    result |= frontier
    for _ in range(depth):
        new: set[str] = set()
        for n in sorted(frontier):
            new.update(_decl_constants(env, n, with_body=False))
        frontier = close(new) - result
        if not frontier:
            break
        result |= frontier
    return result


def _statement(env: Environment, name: str) -> Term:
    if name not in env:
        raise UnknownName(name)
    d = env.owner(name)
    if isinstance(d, Inductive):
        raise ValueError(f"{name} is not a proposition")
    ty = d.type if d.name == name else env.type_of(name)
    if _kind(env, ty) is not Sort.PROP:
        raise ValueError(f"{name} is not a proposition")
    return ty


def build_problem(env: Environment, conjecture: str, premises: Iterable[str] | str | None = None,
                  depth: int = 2, arity_opt: bool = False,
                  state: EncoderState | None = None) -> Problem:
    """Assemble the Problem for ``conjecture``.

    ``premises`` defaults to the extended dependencies of the conjecture
    itself (constants of its statement and proof); ``ALL`` takes every
    declaration preceding the conjecture.
    """
    stmt = _statement(env, conjecture)
    own = env.owner(conjecture)
    st = state or EncoderState(env)
    st.source = conjecture
    goal = fol.simplify(encode_prop(st, (), stmt))
    goal_lifted = st.drain()

    if premises == ALL:
        idx = env.decls.index(own)
        chosen = [d for d in env.decls[:idx]]
    else:
        roots = [conjecture] if premises is None else list(premises)
        names = extended_deps(env, roots, depth) if roots else set()
        names -= set(declared_names(own))
        chosen = [d for d in env.decls if d is not own and any(n in names for n in declared_names(d))]

    axioms: list[LabeledAxiom] = []
    for d in chosen:
        axioms += translate_decl(st, d)
    axioms += goal_lifted

    seen: set[str] = set()
    unique = []
    for a in axioms:
        label = a.label
        k = 1
        while label in seen or label == conjecture:
            label = f"{a.label}_{k}"
            k += 1
        seen.add(label)
        unique.append(LabeledAxiom(label, a.role, a.formula, a.source, a.kind))
    conj = LabeledAxiom(conjecture, Role.CONJECTURE, goal, conjecture, "conjecture")
    p = Problem(tuple(unique), conj)
    return arity_optimize(p) if arity_opt else p


def translate_all(env: Environment) -> tuple[list[LabeledAxiom], EncoderState]:
    """Every declaration of ``env`` in order, with one shared encoder state."""
    st = EncoderState(env)
    out: list[LabeledAxiom] = []
    for d in env.decls:
        out += translate_decl(st, d)
    return out, st
