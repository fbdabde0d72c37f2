"""Shared helpers for the test suite."""

from __future__ import annotations

import re

from tthammer import kernel
from tthammer.fol import And, Atom, Implies, Not, Or
from tthammer.kernel import App, Case, Const, Definition, Inductive, Lambda, Pi, Typing, Var

HOLE = kernel.parse_decls("(typing proof_hole (pi (P (sort prop)) (var P)))")[0]


def _children(t):
    """(index, subterm, binder pushed for it) of each immediate subterm."""
    if isinstance(t, App):
        return [(0, t.fn, None), (1, t.arg, None)]
    if isinstance(t, (Lambda, Pi)):
        return [(0, t.binder_type, None), (1, t.body, (t.binder, t.binder_type))]
    if isinstance(t, Case):
        return [(0, t.scrutinee, None), (1, t.return_pred, None)] + [
            (2 + i, b, None) for i, b in enumerate(t.branches)]
    return []


def proof_sites(env, t, ctx=(), path=()):
    """Paths to every proof subterm of ``t``, outermost first."""
    if kernel.is_proof(env, ctx, t):
        yield path, ctx, t
    for i, sub, binder in _children(t):
        yield from proof_sites(env, sub, ctx + ((binder,) if binder else ()), path + (i,))


def replace_at(t, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, App):
        return App(replace_at(t.fn, rest, new), t.arg) if i == 0 else App(t.fn, replace_at(t.arg, rest, new))
    if isinstance(t, (Lambda, Pi)):
        if i == 0:
            return type(t)(t.binder, replace_at(t.binder_type, rest, new), t.body)
        return type(t)(t.binder, t.binder_type, replace_at(t.body, rest, new))
    if isinstance(t, Case):
        parts = [t.scrutinee, t.return_pred, *t.branches]
        parts[i] = replace_at(parts[i], rest, new)
        return Case(t.ind, t.n_params, parts[0], parts[1], tuple(parts[2:]))
    raise ValueError(path)


def decl_terms(d):
    if isinstance(d, Definition):
        return {"body": d.body, "type": d.type}
    if isinstance(d, Typing):
        return {"type": d.type}
    return {c: ty for c, ty in d.constructors}


def with_term(d, slot, t):
    if isinstance(d, Definition):
        return Definition(d.name, t, d.type) if slot == "body" else Definition(d.name, d.body, t)
    if isinstance(d, Typing):
        return Typing(d.name, t)
    return Inductive(d.name, d.arity, d.n_params,
                     tuple((c, t if c == slot else ty) for c, ty in d.constructors))


def all_proof_sites(env):
    """(declaration index, slot, path, context, proof) for every proof subterm."""
    out = []
    for k, d in enumerate(env.decls):
        for slot, t in decl_terms(d).items():
            for path, ctx, p in proof_sites(env, t):
                out.append((k, slot, path, ctx, p))
    return out


def alternative_proof(env, ctx, p, rng):
    """A different term with the same type as the proof ``p``."""
    ty = kernel.infer_type(env, ctx, p)
    options = [
        App(Const("proof_hole"), ty),
        App(Lambda("h'", ty, Var("h'")), p),
    ]
    same = [Var(x) for x, xty in ctx if kernel.alpha_eq(xty, ty) and Var(x) != p]
    return rng.choice(options + same)


_FRESH = re.compile(r"'?\b(lam|case|pi)_\d+\b")


def canonical_fresh(text: str) -> str:
    """Rename lifted constants in order of first occurrence."""
    names: dict[str, str] = {}

    def sub(m):
        return names.setdefault(m.group(0), f"{m.group(1)}#{len(names)}")

    return _FRESH.sub(sub, text)


A, B, C = Atom("A"), Atom("B"), Atom("C")
PEIRCE = Implies(Implies(Implies(A, B), A), A)

# classically valid, intuitionistically invalid
CLASSICAL_ONLY = [
    Or(A, Not(A)),
    Implies(Not(Not(A)), A),
    Or(Implies(A, B), Implies(B, A)),
    Implies(Implies(Not(A), A), A),
    Implies(Not(And(A, B)), Or(Not(A), Not(B))),
    Implies(Implies(A, B), Or(Not(A), B)),
    Or(Not(A), Not(Not(A))),
    Implies(Implies(Not(A), Not(B)), Implies(B, A)),
    Implies(Implies(A, Or(B, C)), Or(Implies(A, B), Implies(A, C))),
    Or(A, Implies(A, B)),
]
