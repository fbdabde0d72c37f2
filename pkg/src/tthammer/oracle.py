"""Brute-force reference procedures used to cross-check the real engines.

Nothing here shares code with the prover, the clausifier or the proof
search; each procedure is the most direct implementation available.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from .fol import (
    BOTTOM, And, Atom, Bottom, Eq, Exists, FFun, Forall, Formula, FolTerm, FVar,
    Iff, Implies, Not, Or, Top,
)


class MissingTable(KeyError):
    pass


class NotPropositional(ValueError):
    pass


@dataclass
class Model:
    """A finite structure over ``range(domain_size)``.

    Function tables map argument tuples to elements; predicate tables are
    the sets of argument tuples that hold.
    """

    domain_size: int
    functions: dict[str, dict[tuple[int, ...], int]] = field(default_factory=dict)
    predicates: dict[str, set[tuple[int, ...]]] = field(default_factory=dict)


def _eval_term(t: FolTerm, m: Model, env: dict[str, int]) -> int:
    if type(t) is FVar:
        try:
            return env[t.name]
        except KeyError:
            raise MissingTable(f"free variable {t.name}") from None
    table = m.functions.get(t.name)
    if table is None:
        raise MissingTable(t.name)
    return table[tuple([_eval_term(a, m, env) for a in t.args])]


def eval_finite_model(f: Formula, model: Model, env: dict[str, int] | None = None) -> bool:
    """Tarskian truth of ``f`` in ``model``; quantifiers range over the domain."""
    env = env or {}
    cls = type(f)
    if cls is Atom:
        table = model.predicates.get(f.pred)
        if table is None:
            raise MissingTable(f.pred)
        return tuple([_eval_term(a, model, env) for a in f.args]) in table
    if cls is Eq:
        return _eval_term(f.left, model, env) == _eval_term(f.right, model, env)
    if cls is Not:
        return not eval_finite_model(f.body, model, env)
    if cls is And:
        return eval_finite_model(f.left, model, env) and eval_finite_model(f.right, model, env)
    if cls is Or:
        return eval_finite_model(f.left, model, env) or eval_finite_model(f.right, model, env)
    if cls is Implies:
        return not eval_finite_model(f.left, model, env) or eval_finite_model(f.right, model, env)
    if cls is Iff:
        return eval_finite_model(f.left, model, env) == eval_finite_model(f.right, model, env)
    if cls is Forall:
        for d in range(model.domain_size):
            if not eval_finite_model(f.body, model, {**env, f.var: d}):
                return False
        return True
    if cls is Exists:
        for d in range(model.domain_size):
            if eval_finite_model(f.body, model, {**env, f.var: d}):
                return True
        return False
    if cls is Top:
        return True
    if cls is Bottom:
        return False
    raise TypeError(f)


def iter_models(functions: dict[str, int], predicates: dict[str, int], size: int) -> Iterator[Model]:
    """Every structure of the given signature on a domain of ``size``."""
    dom = range(size)
    fnames = sorted(functions)
    pnames = sorted(predicates)
    fkeys = {n: list(itertools.product(dom, repeat=functions[n])) for n in fnames}
    pkeys = {n: list(itertools.product(dom, repeat=predicates[n])) for n in pnames}
    ftables = [itertools.product(dom, repeat=len(fkeys[n])) for n in fnames]
    fchoices = list(itertools.product(*[list(t) for t in ftables]))
    pchoices = list(itertools.product(*[list(itertools.product((False, True), repeat=len(pkeys[n])))
                                        for n in pnames]))
    for fc in fchoices:
        funcs = {n: dict(zip(fkeys[n], vals)) for n, vals in zip(fnames, fc)}
        for pc in pchoices:
            preds = {n: {k for k, v in zip(pkeys[n], vals) if v} for n, vals in zip(pnames, pc)}
            yield Model(size, funcs, preds)


def signature(formulas: Iterable[Formula]) -> tuple[dict[str, int], dict[str, int]]:
    funs: dict[str, int] = {}
    preds: dict[str, int] = {}

    def term(t: FolTerm) -> None:
        if isinstance(t, FFun):
            funs[t.name] = len(t.args)
            for a in t.args:
                term(a)

    def go(f: Formula) -> None:
        if isinstance(f, Atom):
            preds[f.pred] = len(f.args)
            for a in f.args:
                term(a)
        elif isinstance(f, Eq):
            term(f.left)
            term(f.right)
        elif isinstance(f, Not):
            go(f.body)
        elif isinstance(f, (And, Or, Implies, Iff)):
            go(f.left)
            go(f.right)
        elif isinstance(f, (Forall, Exists)):
            go(f.body)

    for f in formulas:
        go(f)
    return funs, preds


def _compile_term(t: FolTerm):
    if type(t) is FVar:
        name = t.name
        return lambda m, env: env[name]
    name = t.name
    args = [_compile_term(a) for a in t.args]
    if not args:
        return lambda m, env: m.functions[name][()]
    return lambda m, env: m.functions[name][tuple([g(m, env) for g in args])]


def compile_formula(f: Formula):
    """``f`` as a function of (model, env); agrees with :func:`eval_finite_model`."""
    cls = type(f)
    if cls is Atom:
        name = f.pred
        args = [_compile_term(a) for a in f.args]
        return lambda m, env: tuple([g(m, env) for g in args]) in m.predicates[name]
    if cls is Eq:
        l, r = _compile_term(f.left), _compile_term(f.right)
        return lambda m, env: l(m, env) == r(m, env)
    if cls is Top:
        return lambda m, env: True
    if cls is Bottom:
        return lambda m, env: False
    if cls is Not:
        b = compile_formula(f.body)
        return lambda m, env: not b(m, env)
    if cls in (And, Or, Implies, Iff):
        l, r = compile_formula(f.left), compile_formula(f.right)
        if cls is And:
            return lambda m, env: l(m, env) and r(m, env)
        if cls is Or:
            return lambda m, env: l(m, env) or r(m, env)
        if cls is Implies:
            return lambda m, env: not l(m, env) or r(m, env)
        return lambda m, env: l(m, env) == r(m, env)
    if cls in (Forall, Exists):
        b, v = compile_formula(f.body), f.var
        if cls is Forall:
            return lambda m, env: all(b(m, {**env, v: d}) for d in range(m.domain_size))
        return lambda m, env: any(b(m, {**env, v: d}) for d in range(m.domain_size))
    raise TypeError(f)


def satisfiable(formulas: Iterable[Formula], size: int) -> bool:
    """Whether some structure of the given domain size satisfies all formulas."""
    formulas = list(formulas)
    funs, preds = signature(formulas)
    checks = [compile_formula(f) for f in formulas]
    models = _models(tuple(sorted(funs.items())), tuple(sorted(preds.items())), size)
    return any(all(c(m, {}) for c in checks) for m in models)


@functools.lru_cache(maxsize=256)
def _models(funs: tuple, preds: tuple, size: int) -> tuple[Model, ...]:
    return tuple(iter_models(dict(funs), dict(preds), size))


# --------------------------------------------------------------------------
# Intuitionistic propositional logic


def _is_atom(f: Formula) -> bool:
    return isinstance(f, Atom)


def _normalize(f: Formula) -> Formula:
    if isinstance(f, Atom):
        if f.args:
            raise NotPropositional(f"atom with arguments: {f.pred}")
        return f
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Implies(_normalize(f.body), BOTTOM)
    if isinstance(f, Iff):
        a, b = _normalize(f.left), _normalize(f.right)
        return And(Implies(a, b), Implies(b, a))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(_normalize(f.left), _normalize(f.right))
    raise NotPropositional(type(f).__name__)


_IPC_MEMO: dict[tuple[frozenset, Formula], bool] = {}


def ipc_decide(f: Formula) -> bool:
    """Intuitionistic validity of a propositional formula.

    Exhaustive search in the contraction-free calculus G4ip, which
    terminates without loop checking.
    """
    return _g4(frozenset(), _normalize(f))


def _g4(ctx: frozenset, goal: Formula) -> bool:
    key = (ctx, goal)
    hit = _IPC_MEMO.get(key)
    if hit is None:
        hit = _g4_search(ctx, goal)
        if len(_IPC_MEMO) > 2_000_000:
            _IPC_MEMO.clear()
        _IPC_MEMO[key] = hit
    return hit


def _g4_search(ctx: frozenset, goal: Formula) -> bool:
    if BOTTOM in ctx or goal in ctx or isinstance(goal, Top):
        return True
    # invertible left rules
    for h in ctx:
        rest = ctx - {h}
        if isinstance(h, Top):
            return _g4(rest, goal)
        if isinstance(h, And):
            return _g4(rest | {h.left, h.right}, goal)
        if isinstance(h, Or):
            return _g4(rest | {h.left}, goal) and _g4(rest | {h.right}, goal)
        if isinstance(h, Implies):
            a, b = h.left, h.right
            if isinstance(a, Bottom):
                return _g4(rest, goal)
            if isinstance(a, Top):
                return _g4(rest | {b}, goal)
            if _is_atom(a) and a in ctx:
                return _g4(rest | {b}, goal)
            if isinstance(a, And):
                return _g4(rest | {Implies(a.left, Implies(a.right, b))}, goal)
            if isinstance(a, Or):
                return _g4(rest | {Implies(a.left, b), Implies(a.right, b)}, goal)
    # invertible right rules
    if isinstance(goal, Implies):
        return _g4(ctx | {goal.left}, goal.right)
    if isinstance(goal, And):
        return _g4(ctx, goal.left) and _g4(ctx, goal.right)
    # non-invertible rules
    if isinstance(goal, Or) and (_g4(ctx, goal.left) or _g4(ctx, goal.right)):
        return True
    for h in ctx:
        if isinstance(h, Implies) and isinstance(h.left, Implies):
            c, d, b = h.left.left, h.left.right, h.right
            rest = ctx - {h}
            if _g4(rest | {Implies(d, b)}, Implies(c, d)) and _g4(rest | {b}, goal):
                return True
    return False


def classically_valid(f: Formula) -> bool:
    """Truth-table check of a propositional formula."""
    atoms = sorted(_prop_atoms(f))
    for vals in itertools.product((False, True), repeat=len(atoms)):
        m = Model(1, {}, {a: ({()} if v else set()) for a, v in zip(atoms, vals)})
        if not eval_finite_model(f, m):
            return False
    return True


def _prop_atoms(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        return {f.pred}
    if isinstance(f, Not):
        return _prop_atoms(f.body)
    if isinstance(f, (And, Or, Implies, Iff)):
        return _prop_atoms(f.left) | _prop_atoms(f.right)
    return set()


ATOM_NAMES = ("A", "B", "C", "D", "E")


def enumerate_formulas(atoms: int, depth: int) -> Iterator[Formula]:
    """All formulas over ``atoms`` atoms and bottom with at most ``depth``
    connectives from {->, &, |, ~}, by connective count then in a fixed
    constructor order."""
    levels: list[list[Formula]] = []
    for n in range(depth + 1):
        if n == 0:
            level = [Atom(a) for a in ATOM_NAMES[:atoms]] + [BOTTOM]
        else:
            level = [Not(f) for f in levels[n - 1]]
            for cls in (Implies, And, Or):
                for i in range(n):
                    for left in levels[i]:
                        for right in levels[n - 1 - i]:
                            level.append(cls(left, right))
        levels.append(level)
        yield from level


def count_formulas(atoms: int, depth: int) -> int:
    counts: list[int] = []
    for n in range(depth + 1):
        if n == 0:
            counts.append(atoms + 1)
        else:
            counts.append(counts[n - 1] + 3 * sum(counts[i] * counts[n - 1 - i] for i in range(n)))
    return sum(counts)


# --------------------------------------------------------------------------
# Ground equational reasoning


def _all_subterms(t: FolTerm, out: set) -> None:
    out.add(t)
    if isinstance(t, FFun):
        for a in t.args:
            _all_subterms(a, out)


def ground_congruent(equations: Iterable[tuple[FolTerm, FolTerm]], left: FolTerm, right: FolTerm) -> bool:
    """Whether ``left = right`` follows from ground equations under congruence.

    Naive fixpoint: classes are merged by the equations and by congruence
    over every pair of subterms until nothing changes.
    """
    return bool(_ground_classes(list(equations), [left, right], [(left, right)]))


def _ground_classes(equations: list, extra: list, queries: list) -> bool:
    terms: set = set()
    for l, r in equations:
        _all_subterms(l, terms)
        _all_subterms(r, terms)
    for t in extra:
        _all_subterms(t, terms)
    cls = {t: i for i, t in enumerate(sorted(terms, key=repr))}

    def merge(a, b) -> bool:
        ca, cb = cls[a], cls[b]
        if ca == cb:
            return False
        for t, c in cls.items():
            if c == cb:
                cls[t] = ca
        return True

    for l, r in equations:
        merge(l, r)
    apps = [t for t in terms if isinstance(t, FFun) and t.args]
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(apps, 2):
            if (a.name == b.name and len(a.args) == len(b.args) and cls[a] != cls[b]
                    and all(cls[x] == cls[y] for x, y in zip(a.args, b.args))):
                merge(a, b)
                changed = True
    return all(cls[l] == cls[r] for l, r in queries)


def ground_atoms_congruent(equations: Iterable[tuple[FolTerm, FolTerm]], a: Atom, b: Atom) -> bool:
    if a.pred != b.pred or len(a.args) != len(b.args):
        return False
    if not a.args:
        return True
    return _ground_classes(list(equations), list(a.args) + list(b.args), list(zip(a.args, b.args)))


# --------------------------------------------------------------------------
# Generators for the cross-checks

SMALL_SIGNATURE = (("p", 1), ("r", 2))
GROUND_SYMBOLS = (("a", 0), ("b", 0), ("f", 1), ("g", 2))


def _atoms_over(signature, variables: tuple[str, ...]) -> list[Formula]:
    out: list[Formula] = []
    for name, arity in signature:
        for args in itertools.product(variables, repeat=arity):
            out.append(Atom(name, tuple(FVar(v) for v in args)))
    for a, b in itertools.combinations(variables, 2):
        out.append(Eq(FVar(a), FVar(b)))
    return out


_TAGS = {Not: "~", And: "&", Or: "|", Implies: ">", Iff: "=", Forall: "A", Exists: "E"}


def _canonical_key(f: Formula, names: dict[str, str], counter: list[int]) -> str:
    """A string naming the alpha-equivalence class of ``f``: bound variables
    are renamed in binding order."""
    cls = type(f)
    if cls is Atom:
        return f.pred + "(" + ",".join(names.get(a.name, a.name) for a in f.args) + ")"
    if cls is Eq:
        return names.get(f.left.name, f.left.name) + "=" + names.get(f.right.name, f.right.name)
    if cls is Not:
        return "~" + _canonical_key(f.body, names, counter)
    if cls in (Forall, Exists):
        v = f"V{counter[0]}"
        counter[0] += 1
        return _TAGS[cls] + v + "." + _canonical_key(f.body, {**names, f.var: v}, counter)
    if cls in _TAGS:
        return ("(" + _canonical_key(f.left, names, counter) + _TAGS[cls]
                + _canonical_key(f.right, names, counter) + ")")
    return cls.__name__


def enumerate_closed_formulas(max_connectives: int = 2, max_quantifiers: int = 2,
                              signature=SMALL_SIGNATURE, variables=("X", "Y")) -> Iterator[Formula]:
    """Closed formulas over ``signature`` and equality with at most the given
    numbers of connectives (from ~, &, |, ->, <->) and quantifiers, one per
    alpha-equivalence class, in a fixed order."""
    # table[(c, q)] holds (formula, free variables) pairs
    table: dict[tuple[int, int], list] = {
        (0, 0): [(a, frozenset(_atom_vars(a))) for a in _atoms_over(signature, variables)]}
    for c in range(max_connectives + 1):
        for q in range(max_quantifiers + 1):
            if (c, q) == (0, 0):
                continue
            level: list = []
            if c >= 1:
                level += [(Not(f), fv) for f, fv in table[(c - 1, q)]]
                for cls in (And, Or, Implies, Iff):
                    for c1 in range(c):
                        for q1 in range(q + 1):
                            for left, fl in table[(c1, q1)]:
                                for right, fr in table[(c - 1 - c1, q - q1)]:
                                    level.append((cls(left, right), fl | fr))
            if q >= 1:
                for f, fv in table[(c, q - 1)]:
                    for v in variables:
                        # formulas that cannot be closed by the remaining quantifiers are dropped
                        rest = fv - {v}
                        level.append((Forall(v, f), rest))
                        level.append((Exists(v, f), rest))
            room = max_quantifiers - q
            table[(c, q)] = [(f, fv) for f, fv in level if len(fv) <= room]
    seen: set = set()
    for c in range(max_connectives + 1):
        for q in range(max_quantifiers + 1):
            for f, fv in table[(c, q)]:
                if fv:
                    continue
                key = _canonical_key(f, {}, [0])
                if key not in seen:
                    seen.add(key)
                    yield f


def _atom_vars(f: Formula) -> list[str]:
    if isinstance(f, Eq):
        return [f.left.name, f.right.name]
    return [a.name for a in f.args]


def random_ground_term(rng, depth: int, symbols=GROUND_SYMBOLS) -> FolTerm:
    choices = [s for s in symbols if depth > 0 or s[1] == 0]
    name, arity = rng.choice(choices)
    return FFun(name, tuple(random_ground_term(rng, depth - 1, symbols) for _ in range(arity)))


def random_ground_instance(rng, max_equations: int = 8, depth: int = 3, symbols=GROUND_SYMBOLS):
    """Random ground equations and a query pair over ``symbols``."""
    n = rng.randint(0, max_equations)
    eqs = [(random_ground_term(rng, rng.randint(0, depth), symbols),
            random_ground_term(rng, rng.randint(0, depth), symbols)) for _ in range(n)]
    query = (random_ground_term(rng, rng.randint(0, depth), symbols),
             random_ground_term(rng, rng.randint(0, depth), symbols))
    return eqs, query
