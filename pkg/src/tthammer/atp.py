"""Clausification, a small given-clause resolution prover, and external
prover invocation.

Terms inside the prover are plain tuples for speed: a variable is an
``int``, an application is ``(name, arg, ...)`` and a constant is
``(name,)``.  A literal is ``(positive, predicate, args)``; equality is
the predicate ``"="`` axiomatised by reflexivity, symmetry, transitivity
and congruence clauses.
"""

from __future__ import annotations

import heapq
import itertools
import os
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass
from typing import Iterable

from . import fol
from .fol import (
    And, Atom, AtpResult, Bottom, Eq, Exists, FFun, Forall, Formula, FolTerm, FVar, Iff,
    Implies, Not, Or, Problem, Status, Top,
)

EQ = "="


@dataclass(frozen=True)
class Clause:
    literals: tuple
    origins: frozenset = frozenset()

    def __str__(self) -> str:
        if not self.literals:
            return "[]"
        return " | ".join(_lit_str(l) for l in self.literals)


def _term_str(t) -> str:
    if isinstance(t, int):
        return f"X{t}"
    if len(t) == 1:
        return t[0]
    return f"{t[0]}({','.join(_term_str(a) for a in t[1:])})"


def _lit_str(lit) -> str:
    sign, pred, args = lit
    if pred == EQ:
        body = f"{_term_str(args[0])} = {_term_str(args[1])}"
        return body if sign else f"~({body})"
    body = pred if not args else f"{pred}({','.join(_term_str(a) for a in args)})"
    return body if sign else "~" + body


# --------------------------------------------------------------------------
# Clausification


class _Namer:
    def __init__(self) -> None:
        self.skolems = 0
        self.vars = itertools.count()

    def skolem(self) -> str:
        self.skolems += 1
        return f"'sk_{self.skolems}"


def _nnf(f: Formula, positive: bool = True) -> Formula:
    """Negation normal form over And/Or/Forall/Exists and literals."""
    if isinstance(f, (Atom, Eq)):
        return f if positive else Not(f)
    if isinstance(f, Top):
        return fol.TOP if positive else fol.BOTTOM
    if isinstance(f, Bottom):
        return fol.BOTTOM if positive else fol.TOP
    if isinstance(f, Not):
        return _nnf(f.body, not positive)
    if isinstance(f, And):
        cls = And if positive else Or
        return cls(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Or):
        cls = Or if positive else And
        return cls(_nnf(f.left, positive), _nnf(f.right, positive))
    if isinstance(f, Implies):
        if positive:
            return Or(_nnf(f.left, False), _nnf(f.right, True))
        return And(_nnf(f.left, True), _nnf(f.right, False))
    if isinstance(f, Iff):
        a, b = f.left, f.right
        if positive:
            return And(Or(_nnf(a, False), _nnf(b, True)), Or(_nnf(b, False), _nnf(a, True)))
        return Or(And(_nnf(a, True), _nnf(b, False)), And(_nnf(a, False), _nnf(b, True)))
    if isinstance(f, Forall):
        cls = Forall if positive else Exists
        return cls(f.var, _nnf(f.body, positive))
    if isinstance(f, Exists):
        cls = Exists if positive else Forall
        return cls(f.var, _nnf(f.body, positive))
    raise TypeError(f)


def _to_tuple_term(t: FolTerm, env: dict):
    if isinstance(t, FVar):
        v = env.get(t.name)
        if v is None:
            # free variable of an axiom: implicitly universal
            raise KeyError(t.name)
        return v
    return (t.name,) + tuple(_to_tuple_term(a, env) for a in t.args)


def _tuple_vars(t, out: dict) -> None:
    if isinstance(t, int):
        out.setdefault(t)
    else:
        for a in t[1:]:
            _tuple_vars(a, out)


def _skolemize(f: Formula, env: dict, namer: _Namer):
    """Replace quantifiers; returns a tree of ('and'|'or', l, r) / ('lit', literal) / 'T' / 'F'."""
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bottom):
        return "F"
    if isinstance(f, (Atom, Eq, Not)):
        sign = not isinstance(f, Not)
        a = f if sign else f.body
        if isinstance(a, Eq):
            return ("lit", (sign, EQ, (_to_tuple_term(a.left, env), _to_tuple_term(a.right, env))))
        return ("lit", (sign, a.pred, tuple(_to_tuple_term(x, env) for x in a.args)))
    if isinstance(f, (And, Or)):
        tag = "and" if isinstance(f, And) else "or"
        return (tag, _skolemize(f.left, env, namer), _skolemize(f.right, env, namer))
    if isinstance(f, Forall):
        return _skolemize(f.body, {**env, f.var: next(namer.vars)}, namer)
    if isinstance(f, Exists):
        # inner Skolemization: depend only on the variables actually free here
        deps: dict = {}
        for name in fol.formula_free_vars(f):
            if name in env:
                _tuple_vars(env[name], deps)
        sk = (namer.skolem(),) + tuple(sorted(deps))
        return _skolemize(f.body, {**env, f.var: sk}, namer)
    raise TypeError(f)


def _cnf(tree) -> list[list]:
    if tree == "T":
        return []
    if tree == "F":
        return [[]]
    if tree[0] == "lit":
        return [[tree[1]]]
    left, right = _cnf(tree[1]), _cnf(tree[2])
    if tree[0] == "and":
        return left + right
    return [a + b for a in left for b in right]


def _normalize_clause(lits: Iterable) -> tuple | None:
    """Deduplicate, drop tautologies (returns None), rename variables 0..n."""
    seen: dict = {}
    for lit in lits:
        seen.setdefault(lit)
    # ~(t = t) is refuted by reflexivity
    lits = [l for l in seen if l[0] or l[1] != EQ or l[2][0] != l[2][1]]
    pos = {(p, a) for s, p, a in lits if s}
    for s, p, a in lits:
        if not s and (p, a) in pos:
            return None
        if s and p == EQ and a[0] == a[1]:
            return None
    return _rename(tuple(sorted(lits, key=_lit_key)))


def _lit_key(lit):
    return (not lit[0], lit[1], repr(lit[2]))


def _rename(lits: tuple) -> tuple:
    order: dict = {}
    for _, _, args in lits:
        for a in args:
            _tuple_vars(a, order)
    if list(order) == list(range(len(order))):
        return lits
    m = {v: i for i, v in enumerate(order)}
    return tuple((s, p, tuple(_apply_map(a, m) for a in args)) for s, p, args in lits)


def _apply_map(t, m):
    if isinstance(t, int):
        return m[t]
    if len(t) == 1:
        return t
    return (t[0],) + tuple(_apply_map(a, m) for a in t[1:])


def clausify_formula(f: Formula, origin: str = "", namer: _Namer | None = None) -> list[Clause]:
    namer = namer or _Namer()
    closed = fol.close_formula(f)
    tree = _skolemize(_nnf(closed), {}, namer)
    out = []
    for lits in _cnf(tree):
        norm = _normalize_clause(lits)
        if norm is not None:
            out.append(Clause(norm, frozenset([origin]) if origin else frozenset()))
    return out


def _symbols(clauses: Iterable[Clause]) -> tuple[dict, dict]:
    funs: dict = {}
    preds: dict = {}

    def term(t):
        if not isinstance(t, int):
            funs[t[0]] = len(t) - 1
            for a in t[1:]:
                term(a)

    for c in clauses:
        for _, p, args in c.literals:
            if p != EQ:
                preds[p] = len(args)
            for a in args:
                term(a)
    return funs, preds


def equality_axioms(clauses: Iterable[Clause]) -> list[Clause]:
    """Reflexivity, symmetry, transitivity and congruence clauses."""
    clauses = list(clauses)
    if not any(p == EQ for c in clauses for _, p, _ in c.literals):
        return []
    funs, preds = _symbols(clauses)
    out = [
        Clause(((True, EQ, (0, 0)),)),
        Clause(((False, EQ, (0, 1)), (True, EQ, (1, 0)))),
        Clause(((False, EQ, (0, 1)), (False, EQ, (1, 2)), (True, EQ, (0, 2)))),
    ]
    for name, n in sorted(funs.items()):
        for i in range(n):
            xs = list(range(2, n + 2))
            left = (name,) + tuple(xs[:i] + [0] + xs[i + 1:])
            right = (name,) + tuple(xs[:i] + [1] + xs[i + 1:])
            out.append(Clause(_rename(((False, EQ, (0, 1)), (True, EQ, (left, right))))))
    for name, n in sorted(preds.items()):
        for i in range(n):
            xs = list(range(2, n + 2))
            left = tuple(xs[:i] + [0] + xs[i + 1:])
            right = tuple(xs[:i] + [1] + xs[i + 1:])
            out.append(Clause(_rename(((False, EQ, (0, 1)), (False, name, left), (True, name, right)))))
    return out


def clausify(p: Problem, with_equality: bool = True) -> list[Clause]:
    """Clauses of the axioms and the negated conjecture.

    Each clause records the label of the formula it came from; equality
    axioms carry no label.
    """
    namer = _Namer()
    out: list[Clause] = []
    for a in p.axioms:
        out += clausify_formula(a.formula, a.label, namer)
    out += clausify_formula(Not(fol.close_formula(p.conjecture.formula)), p.conjecture.label, namer)
    if with_equality:
        out += equality_axioms(out)
    return out


def clause_formula(c: Clause) -> Formula:
    """The clause as a universally closed formula (for oracle checks)."""
    def term(t) -> FolTerm:
        if isinstance(t, int):
            return FVar(f"X{t}")
        return FFun(t[0], tuple(term(a) for a in t[1:]))

    def lit(l) -> Formula:
        s, p, args = l
        a = Eq(term(args[0]), term(args[1])) if p == EQ else Atom(p, tuple(term(x) for x in args))
        return a if s else Not(a)

    return fol.close_formula(fol.disj(lit(l) for l in c.literals) if c.literals else fol.BOTTOM)


# --------------------------------------------------------------------------
# Unification and matching


def _walk(t, s: dict):
    while isinstance(t, int) and t in s:
        t = s[t]
    return t


def _occurs(v: int, t, s: dict) -> bool:
    t = _walk(t, s)
    if isinstance(t, int):
        return t == v
    return any(_occurs(v, a, s) for a in t[1:])


def unify(a, b, s: dict) -> dict | None:
    stack = [(a, b)]
    s = dict(s)
    while stack:
        x, y = stack.pop()
        x, y = _walk(x, s), _walk(y, s)
        if x == y:
            continue
        if isinstance(x, int):
            if _occurs(x, y, s):
                return None
            s[x] = y
        elif isinstance(y, int):
            if _occurs(y, x, s):
                return None
            s[y] = x
        else:
            if x[0] != y[0] or len(x) != len(y):
                return None
            stack.extend(zip(x[1:], y[1:]))
    return s


def _resolve(t, s: dict):
    t = _walk(t, s)
    if isinstance(t, int) or len(t) == 1:
        return t
    return (t[0],) + tuple(_resolve(a, s) for a in t[1:])


def _match(pattern, target, s: dict) -> dict | None:
    """One-way matching: bind variables of ``pattern`` only."""
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, int):
            bound = s.get(p)
            if bound is None:
                s = {**s, p: t}
            elif bound != t:
                return None
        elif isinstance(t, int) or p[0] != t[0] or len(p) != len(t):
            return None
        else:
            stack.extend(zip(p[1:], t[1:]))
    return s


def subsumes(c: tuple, d: tuple) -> bool:
    """Whether clause ``c`` theta-subsumes clause ``d``."""
    if len(c) > len(d):
        return False

    def go(i: int, s: dict) -> bool:
        if i == len(c):
            return True
        sign, pred, args = c[i]
        for dsign, dpred, dargs in d:
            if dsign == sign and dpred == pred and len(dargs) == len(args):
                s2: dict | None = s
                for a, b in zip(args, dargs):
                    s2 = _match(a, b, s2)
                    if s2 is None:
                        break
                if s2 is not None and go(i + 1, s2):
                    return True
        return False

    return go(0, {})


def _shift(lits: tuple, offset: int) -> tuple:
    def sh(t):
        if isinstance(t, int):
            return t + offset
        if len(t) == 1:
            return t
        return (t[0],) + tuple(sh(a) for a in t[1:])
    return tuple((s, p, tuple(sh(a) for a in args)) for s, p, args in lits)


def _nvars(lits: tuple) -> int:
    m = -1

    def go(t):
        nonlocal m
        if isinstance(t, int):
            m = max(m, t)
        else:
            for a in t[1:]:
                go(a)
    for _, _, args in lits:
        for a in args:
            go(a)
    return m + 1


def _weight(lits: tuple) -> int:
    """Symbol count, with each literal costing three extra."""
    def w(t) -> int:
        if isinstance(t, int):
            return 1
        return 1 + sum(w(a) for a in t[1:])
    return sum(4 + sum(w(a) for a in args) for _, _, args in lits)


def _depth(t) -> int:
    if isinstance(t, int) or len(t) == 1:
        return 0
    return 1 + max(_depth(a) for a in t[1:])


# --------------------------------------------------------------------------
# Saturation


@dataclass
class Limits:
    max_clauses: int = 400_000
    max_seconds: float = 30.0
    max_weight: int = 80
    max_depth: int = 8
    select: bool = True


def _term_key(t):
    return (_weight_term(t), repr(t))


def _weight_term(t) -> int:
    if isinstance(t, int):
        return 1
    return 1 + sum(_weight_term(a) for a in t[1:])


def _var_counts(t, out: dict) -> dict:
    if isinstance(t, int):
        out[t] = out.get(t, 0) + 1
    else:
        for a in t[1:]:
            _var_counts(a, out)
    return out


def orient(l, r):
    """Orient an equation for rewriting, or None when neither way decreases.

    Ground sides compare by weight, then by their printed form; with
    variables the left side must be strictly heavier and contain every
    variable of the right side at least as often.
    """
    for a, b in ((l, r), (r, l)):
        va, vb = _var_counts(a, {}), _var_counts(b, {})
        if any(vb[v] > va.get(v, 0) for v in vb):
            continue
        if isinstance(a, int):
            continue
        if not va and not vb:
            if _term_key(a) > _term_key(b):
                return a, b
        elif _weight_term(a) > _weight_term(b):
            return a, b
    return None


def _rewrite(t, rules: dict, budget: list):
    """Innermost normal form of ``t`` under ``rules`` (keyed by head symbol)."""
    if isinstance(t, int):
        return t, frozenset()
    used = frozenset()
    if len(t) > 1:
        args = []
        for a in t[1:]:
            a2, u = _rewrite(a, rules, budget)
            args.append(a2)
            used |= u
        t = (t[0],) + tuple(args)
    for lhs, rhs, origins in rules.get(t[0], ()):
        if budget[0] <= 0:
            break
        s = _match(lhs, t, {})
        if s is not None:
            budget[0] -= 1
            t2, u = _rewrite(_resolve(rhs, s), rules, budget)
            return t2, used | origins | u
    return t, used


@dataclass
class SaturationResult:
    outcome: str            # "proof", "saturated" or "resource_out"
    used_labels: frozenset = frozenset()
    generated: int = 0
    incomplete: bool = False
    reason: str = ""


def saturate(clauses: Iterable[Clause], limits: Limits | None = None,
             support: Iterable[Clause] | None = None) -> SaturationResult:
    """Given-clause saturation with binary resolution and factoring.

    With ``support`` given, only clauses derived from it are selected as
    given clauses (set-of-support); the other clauses are used as partners.
    New clauses are simplified by unit deletion against active unit
    clauses before they are queued.
    """
    limits = limits or Limits()
    deadline = time.monotonic() + limits.max_seconds
    tick = itertools.count()
    passive: list = []
    by_age: list = []
    removed: set[int] = set()
    seen: set = set()
    active: list[Clause | None] = []
    index: dict[tuple, list[tuple[int, int]]] = {}
    units: dict[tuple, list[Clause]] = {}
    rules: dict[str, list] = {}
    generated = 0
    incomplete = False

    def add_active(c: Clause) -> None:
        k = len(active)
        active.append(c)
        for i, (s, p, _) in enumerate(c.literals):
            index.setdefault((s, p), []).append((k, i))
        if len(c.literals) == 1:
            s, p, args = c.literals[0]
            units.setdefault((s, p), []).append(c)
            if s and p == EQ:
                o = orient(*args)
                if o is not None:
                    rules.setdefault(o[0][0], []).append((o[0], o[1], c.origins))

    def demodulate(c: Clause) -> Clause:
        if not rules:
            return c
        budget = [50]
        lits, origins = [], c.origins
        for sign, pred, args in c.literals:
            new = []
            for a in args:
                a2, u = _rewrite(a, rules, budget)
                new.append(a2)
                origins |= u
            lits.append((sign, pred, tuple(new)))
        if origins == c.origins and tuple(lits) == c.literals:
            return c
        norm = _normalize_clause(lits)
        if norm is None:
            return Clause(_TAUTOLOGY, origins)
        return Clause(norm, origins)

    def unit_delete(c: Clause) -> Clause:
        lits, origins = list(c.literals), c.origins
        changed = False
        for lit in list(lits):
            sign, pred, args = lit
            for u in units.get((not sign, pred), ()):
                s: dict | None = {}
                for a, b in zip(u.literals[0][2], args):
                    s = _match(a, b, s)
                    if s is None:
                        break
                if s is not None:
                    lits.remove(lit)
                    origins = origins | u.origins
                    changed = True
                    break
        if not changed:
            return c
        return Clause(_rename(tuple(lits)), origins)

    def push(c: Clause) -> SaturationResult | None:
        nonlocal generated, incomplete
        c = demodulate(c)
        if c.literals is _TAUTOLOGY:
            return None
        c = unit_delete(c)
        if not c.literals:
            return SaturationResult("proof", c.origins, generated)
        if c.literals in seen:
            return None
        w = _weight(c.literals)
        if w > limits.max_weight or any(_depth(a) > limits.max_depth for _, _, args in c.literals for a in args):
            incomplete = True
            return None
        seen.add(c.literals)
        n = next(tick)
        heapq.heappush(passive, (w, n, c))
        heapq.heappush(by_age, (n, c))
        generated += 1
        return None

    clauses = list(clauses)
    if support is None:
        for c in clauses:
            r = push(c)
            if r:
                return r
    else:
        support = list(support)
        for c in clauses:
            if not c.literals:
                return SaturationResult("proof", c.origins, 0)
            if c.literals not in seen:
                seen.add(c.literals)
                add_active(c)
                for f in _factors(c):
                    if f.literals not in seen:
                        seen.add(f.literals)
                        add_active(f)
        for c in support:
            r = push(c)
            if r:
                return r

    step = 0
    while passive or by_age:
        if time.monotonic() > deadline:
            return SaturationResult("resource_out", frozenset(), generated, incomplete, "time")
        if generated > limits.max_clauses:
            return SaturationResult("resource_out", frozenset(), generated, incomplete, "clauses")
        queue = by_age if step % 5 == 0 else passive
        step += 1
        given = None
        while queue:
            item = heapq.heappop(queue)
            n, c = (item[0], item[1]) if queue is by_age else (item[1], item[2])
            if n not in removed:
                removed.add(n)
                given = c
                break
        if given is None:
            continue
        given = demodulate(given)
        if given.literals is _TAUTOLOGY:
            continue
        given = unit_delete(given)
        if not given.literals:
            return SaturationResult("proof", given.origins, generated)
        if any(a is not None and len(a.literals) <= len(given.literals) and subsumes(a.literals, given.literals)
               for a in active):
            continue
        for k, a in enumerate(active):
            if a is not None and len(given.literals) < len(a.literals) and subsumes(given.literals, a.literals):
                active[k] = None
        add_active(given)
        new = list(_factors(given))
        new += _resolvents(given, active, index, limits.select)
        for c in new:
            r = push(c)
            if r:
                return r
    return SaturationResult("saturated", frozenset(), generated, incomplete)


def _factors(c: Clause) -> Iterable[Clause]:
    lits = c.literals
    for i, j in itertools.combinations(range(len(lits)), 2):
        a, b = lits[i], lits[j]
        if a[0] != b[0] or a[1] != b[1] or len(a[2]) != len(b[2]):
            continue
        s: dict | None = {}
        for x, y in zip(a[2], b[2]):
            s = unify(x, y, s)
            if s is None:
                break
        if s is None:
            continue
        rest = [l for k, l in enumerate(lits) if k != j]
        norm = _normalize_clause(_subst_lit(l, s) for l in rest)
        if norm is not None:
            yield Clause(norm, c.origins)


def _subst_lit(lit, s: dict):
    sign, p, args = lit
    return (sign, p, tuple(_resolve(a, s) for a in args))


def _selected(lits: tuple) -> list[int]:
    """Literals of the given clause that may be resolved upon.

    The heaviest negative literal when there is one (goal-directed, as in
    SLD resolution), otherwise every literal.
    """
    neg = [i for i, l in enumerate(lits) if not l[0]]
    if not neg:
        return list(range(len(lits)))
    return [max(neg, key=lambda i: (_weight((lits[i],)), -i))]


def _resolvents(given: Clause, active: list, index: dict, select: bool = False) -> list[Clause]:
    out = []
    # rename the given clause apart from every active clause once
    g = _shift(given.literals, _SHIFT)
    eligible = _selected(given.literals) if select else range(len(g))
    for i in eligible:
        sign, pred, args = g[i]
        for k, j in index.get((not sign, pred), ()):
            other = active[k]
            if other is None:
                continue
            o = other.literals
            s: dict | None = {}
            for x, y in zip(args, o[j][2]):
                s = unify(x, y, s)
                if s is None:
                    break
            if s is None:
                continue
            lits = [_subst_lit(l, s) for n, l in enumerate(g) if n != i]
            lits += [_subst_lit(l, s) for n, l in enumerate(o) if n != j]
            norm = _normalize_clause(lits)
            if norm is not None:
                out.append(Clause(norm, given.origins | other.origins))
    return out


_SHIFT = 1 << 20
_TAUTOLOGY = (("$true",),)


# --------------------------------------------------------------------------
# Provers


def _split_support(p: Problem, clauses: list[Clause]) -> tuple[list[Clause], list[Clause]]:
    """Partner clauses and the set of support.

    The support is the negated conjecture's clauses that contain a negative
    literal; its purely positive clauses (the conjecture's hypotheses) are
    partners, so that search runs backwards from the goal.
    """
    goal = p.conjecture.label
    support = [c for c in clauses if goal in c.origins and any(not l[0] for l in c.literals)]
    if not support:
        support = [c for c in clauses if goal in c.origins]
    chosen = set(map(id, support))
    rest = [c for c in clauses if id(c) not in chosen]
    return rest, support


def prove_builtin(p: Problem, timeout: float = 30.0, limits: Limits | None = None) -> AtpResult:
    """Run the builtin prover: set-of-support first, then full saturation.

    Saturation of the full clause set (no clause discarded by the weight
    limits) proves the negated conjecture consistent with the axioms and
    gives ``CounterSatisfiable``.
    """
    start = time.monotonic()
    if timeout <= 0:
        return AtpResult(Status.TIMEOUT, (), 0.0, "", "")
    limits = limits or Limits()
    clauses = clausify(p)
    rest, support = _split_support(p, clauses)
    total = min(limits.max_seconds, timeout)
    # goal-directed pass on a third of the budget, then the full clause set
    budget = Limits(limits.max_clauses, total / 3, limits.max_weight, limits.max_depth, limits.select)
    r = saturate(rest, budget, support=support)
    if r.outcome != "proof":
        left = total - (time.monotonic() - start)
        if left <= 0:
            return AtpResult(Status.TIMEOUT, (), time.monotonic() - start)
        full = saturate(clauses, Limits(limits.max_clauses, left, limits.max_weight,
                                        limits.max_depth, select=False))
        r = SaturationResult(full.outcome, full.used_labels, full.generated,
                             full.incomplete or (r.incomplete and r.outcome == "saturated"), full.reason)
    elapsed = time.monotonic() - start
    if r.outcome == "proof":
        used = tuple(l for l in p.labels() if l in r.used_labels and l != p.conjecture.label)
        return AtpResult(Status.THEOREM, used, elapsed, "")
    if r.outcome == "saturated":
        if r.incomplete:
            return AtpResult(Status.GAVE_UP, (), elapsed, "", "weight limit")
        return AtpResult(Status.COUNTER_SATISFIABLE, (), elapsed)
    if r.reason == "time":
        return AtpResult(Status.TIMEOUT, (), elapsed)
    return AtpResult(Status.GAVE_UP, (), elapsed, "", r.reason)


def builtin_szs(p: Problem, result: AtpResult) -> str:
    """SZS-style transcript of a builtin result, parseable by ``parse_szs``."""
    m = fol.mangling(p)
    lines = [f"% SZS status {_SZS_NAME[result.status]} for {m.labels[p.conjecture.label]}"]
    for label in result.used_axioms:
        lines.append(f"% cited: file('problem.p', {m.labels[label]})")
    return "\n".join(lines) + "\n"


_SZS_NAME = {
    Status.THEOREM: "Theorem",
    Status.COUNTER_SATISFIABLE: "CounterSatisfiable",
    Status.TIMEOUT: "Timeout",
    Status.GAVE_UP: "GaveUp",
    Status.ERROR: "Error",
}


class SpawnFailed(OSError):
    pass


def run_external(p: Problem, prover_cmd: str, timeout: float = 30.0, keep_files: bool = False,
                 workdir: str | None = None) -> AtpResult:
    """Write ``p`` as TPTP, run ``prover_cmd`` on it and parse the SZS output.

    ``prover_cmd`` may use ``{file}`` and ``{t}`` (timeout in whole
    seconds).  A missing executable gives status ``Error`` with error
    ``SpawnFailed``; exceeding the timeout gives ``Timeout``.
    """
    if timeout <= 0:
        return AtpResult(Status.TIMEOUT, (), 0.0)
    m = fol.mangling(p)
    fd, path = tempfile.mkstemp(suffix=".p", dir=workdir)
    with os.fdopen(fd, "w") as fh:
        fh.write(fol.to_tptp(p))
    argv = shlex.split(prover_cmd.format(file=path, t=max(1, int(timeout))))
    if "{file}" not in prover_cmd:
        argv.append(path)
    start = time.monotonic()
    try:
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=timeout)
    except FileNotFoundError:
        return AtpResult(Status.ERROR, (), 0.0, "", "SpawnFailed")
    except PermissionError:
        return AtpResult(Status.ERROR, (), 0.0, "", "SpawnFailed")
    except subprocess.TimeoutExpired:
        return AtpResult(Status.TIMEOUT, (), time.monotonic() - start)
    finally:
        if not keep_files and os.path.exists(path):
            os.unlink(path)
    elapsed = time.monotonic() - start
    raw = fol.parse_szs(proc.stdout + proc.stderr, m.labels.values(), elapsed)
    used = tuple(l for l in (m.label_of(x) for x in raw.used_axioms)
                 if l is not None and l != p.conjecture.label)
    return AtpResult(raw.status, used if raw.status is Status.THEOREM else (), elapsed, raw.raw, raw.error)
