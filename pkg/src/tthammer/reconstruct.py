"""Proof reconstruction in intuitionistic first-order logic.

A Prop statement and a list of hints (lemmas to assume, constants to
unfold) become a sequent, which is proved by iterative-deepening search
in a contraction-free calculus: Dyckhoff's LJT left rules lifted to first
order, eager invertible rules, instantiation of universal hypotheses by
matching, congruence closure at the leaves and bounded rewriting with
equational hypotheses. Every success yields a trace that an independent
checker replays rule by rule.
"""

from __future__ import annotations

import functools
import itertools
import json
import time
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import fol
from .encoder import EncoderState, encode_prop
from .fol import (
    BOTTOM, And, Atom, Bottom, Eq, Exists, FFun, Forall, Formula, FolTerm, FVar, Iff, Implies, Not,
    Or, Top, subst_formula,
)
from .kernel import (
    Case, Const, Environment, Inductive, Lambda, Pi, Sort, Term, apply,
    beta_normalize, sort_of_type_of, spine, unfold,
)


class NotAProp(ValueError):
    pass


class UnknownLemma(KeyError):
    pass


class TraceError(ValueError):
    pass


# --------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class Hints:
    lemmas: tuple[str, ...] = ()
    unfolds: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"lemmas": list(self.lemmas), "unfolds": list(self.unfolds)}

    @classmethod
    def from_json(cls, data: dict) -> Hints:
        return cls(tuple(data.get("lemmas", ())), tuple(data.get("unfolds", ())))


@dataclass(frozen=True)
class Sequent:
    hyps: frozenset
    goal: Formula

    @functools.cached_property
    def equations(self) -> tuple[tuple[FolTerm, FolTerm], ...]:
        """Equations among the hypotheses, ground ones first.

        Universal equations are kept as (left, right) with their bound
        variables free.
        """
        ground, universal = [], []
        for h in _sorted(self.hyps):
            if isinstance(h, Eq):
                ground.append((h.left, h.right))
            elif isinstance(h, Forall):
                _, body = _block(h)
                while isinstance(body, Implies) and _is_atomic(body.left):
                    body = body.right
                if isinstance(body, Eq):
                    universal.append((body.left, body.right))
        return tuple(ground + universal)


@dataclass(frozen=True)
class Budget:
    depth: int | None = 8
    seconds: float = 10.0
    rewrite_bound: int = 8
    max_steps: int | None = None


@dataclass(frozen=True)
class Step:
    """One rule application: the sequent it proves and the premises' proofs."""

    rule: str
    hyps: frozenset
    goal: Formula
    principal: Formula | None = None
    info: tuple = ()
    children: tuple[Step, ...] = ()

    @property
    def sequent(self) -> Sequent:
        return Sequent(self.hyps, self.goal)

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children)

    def rules(self) -> set[str]:
        out = {self.rule}
        for c in self.children:
            out |= c.rules()
        return out


@dataclass(frozen=True)
class ProofTrace:
    root: Step
    depth: int | None = None
    steps: int = 0


@dataclass(frozen=True)
class Fail:
    reason: str  # DepthExhausted | TimeOut | NoRule | StepLimit
    steps: int = 0


# --------------------------------------------------------------------------
# Formula utilities


def normalize(f: Formula) -> Formula:
    """Replace negation by implication into falsity and unfold equivalence."""
    if isinstance(f, Not):
        return Implies(normalize(f.body), BOTTOM)
    if isinstance(f, Iff):
        a, b = normalize(f.left), normalize(f.right)
        return And(Implies(a, b), Implies(b, a))
    if isinstance(f, (And, Or, Implies)):
        return type(f)(normalize(f.left), normalize(f.right))
    if isinstance(f, (Forall, Exists)):
        return type(f)(f.var, normalize(f.body))
    return f


@functools.lru_cache(maxsize=1 << 20)
def _key(f) -> str:
    return repr(f)


def _sorted(fs: Iterable) -> list:
    return sorted(fs, key=_key)


def _block(f: Formula) -> tuple[list[str], Formula]:
    """Variables and matrix of a guarded universal formula.

    Quantifiers under implications are hoisted when that captures nothing,
    so ``forall x. G -> forall y. C`` gives ``([x, y], G -> C)``.
    """
    if isinstance(f, Forall):
        xs, body = _block(f.body)
        if f.var in xs:
            return [f.var], f.body
        return [f.var] + xs, body
    if isinstance(f, Implies) and isinstance(f.right, (Forall, Implies)):
        xs, body = _block(f.right)
        if xs and not set(xs) & set(fol.formula_free_vars(f.left)):
            return xs, Implies(f.left, body)
    return [], f


def _is_atomic(f: Formula) -> bool:
    return isinstance(f, (Atom, Eq))


@functools.lru_cache(maxsize=1 << 18)
def _first_order(f: Formula) -> bool:
    if isinstance(f, (Forall, Exists, Eq)):
        return True
    if isinstance(f, (And, Or, Implies)):
        return _first_order(f.left) or _first_order(f.right)
    return False


def _ground(t: FolTerm) -> bool:
    if isinstance(t, FVar):
        return False
    return all(_ground(a) for a in t.args)


def _term_size(t: FolTerm) -> int:
    return fol.term_size(t)


def _ground_subterms(f: Formula, out: dict) -> None:
    for t in fol.formula_terms(f):
        for s in fol.subterms(t):
            if _ground(s):
                out.setdefault(s)


def _symbols(f: Formula, out: set) -> None:
    for t in fol.formula_terms(f):
        for s in fol.subterms(t):
            if isinstance(s, FFun):
                out.add(s.name)


def _fresh_eigen(hyps: frozenset, goal: Formula) -> str:
    used: set[str] = set()
    for h in hyps:
        _symbols(h, used)
    _symbols(goal, used)
    k = 0
    while f"'e_{k}" in used:
        k += 1
    return f"'e_{k}"


def _open_binder(f: Forall | Exists, t: FolTerm) -> Formula:
    return subst_formula(f.body, {f.var: t})


def _match(pat: FolTerm, t: FolTerm, xs: frozenset, s: dict) -> dict | None:
    """One-sided matching of ``pat`` (variables ``xs``) against ground ``t``."""
    if isinstance(pat, FVar):
        if pat.name in xs:
            bound = s.get(pat.name)
            if bound is None:
                s = dict(s)
                s[pat.name] = t
                return s
            return s if bound == t else None
        return s if pat == t else None
    if not isinstance(t, FFun) or pat.name != t.name or len(pat.args) != len(t.args):
        return None
    for a, b in zip(pat.args, t.args):
        s = _match(a, b, xs, s)
        if s is None:
            return None
    return s


def _match_atoms(p: Formula, t: Formula, xs: frozenset) -> list[dict]:
    if isinstance(p, Atom) and isinstance(t, Atom):
        if p.pred != t.pred or len(p.args) != len(t.args):
            return []
        s: dict | None = {}
        for a, b in zip(p.args, t.args):
            s = _match(a, b, xs, s)
            if s is None:
                return []
        return [s]
    if isinstance(p, Eq) and isinstance(t, Eq):
        out = []
        for l, r in ((t.left, t.right), (t.right, t.left)):
            s = _match(p.left, l, xs, {})
            if s is not None:
                s = _match(p.right, r, xs, s)
            if s is not None:
                out.append(s)
        return out
    return []


def _conclusions(f: Formula) -> list[Formula]:
    if _is_atomic(f):
        return [f]
    if isinstance(f, Implies):
        return _conclusions(f.right)
    if isinstance(f, (And, Or)):
        return _conclusions(f.left) + _conclusions(f.right)
    return []


def _premises(f: Formula) -> list[Formula]:
    out = []
    while isinstance(f, Implies):
        if _is_atomic(f.left):
            out.append(f.left)
        f = f.right
    return out


# --------------------------------------------------------------------------
# Congruence closure


class CongruenceClosure:
    """Union-find over ground terms with congruence propagation."""

    def __init__(self) -> None:
        self.parent: dict = {}
        self.uses: dict = {}
        self.sig: dict = {}

    def find(self, t):
        root = t
        while self.parent[root] != root:
            root = self.parent[root]
        while t != root:
            self.parent[t], t = root, self.parent[t]
        return root

    def add(self, t) -> None:
        if t in self.parent:
            return
        self.parent[t] = t
        self.uses[t] = []
        if isinstance(t, FFun) and t.args:
            for a in t.args:
                self.add(a)
                self.uses[self.find(a)].append(t)
            key = (t.name, tuple(self.find(a) for a in t.args))
            other = self.sig.get(key)
            if other is None:
                self.sig[key] = t
            else:
                self.merge(t, other)

    def merge(self, a, b) -> None:
        self.add(a)
        self.add(b)
        pending = [(a, b)]
        while pending:
            x, y = pending.pop()
            rx, ry = self.find(x), self.find(y)
            if rx == ry:
                continue
            if len(self.uses[rx]) > len(self.uses[ry]):
                rx, ry = ry, rx
            self.parent[rx] = ry
            moved = self.uses.pop(rx)
            for u in moved:
                key = (u.name, tuple(self.find(a) for a in u.args))
                other = self.sig.get(key)
                if other is not None and self.find(other) != self.find(u):
                    pending.append((u, other))
                else:
                    self.sig[key] = u
            self.uses[ry].extend(moved)

    def equal(self, a, b) -> bool:
        self.add(a)
        self.add(b)
        return self.find(a) == self.find(b)


def congruence_close(equations: Iterable[tuple[FolTerm, FolTerm]], query) -> bool:
    """Whether ``query`` follows from ground ``equations`` by congruence.

    ``query`` is a pair of terms or a pair of atoms.
    """
    cc = CongruenceClosure()
    for l, r in equations:
        cc.merge(l, r)
    a, b = query
    if isinstance(a, Atom):
        return (isinstance(b, Atom) and a.pred == b.pred and len(a.args) == len(b.args)
                and all(cc.equal(x, y) for x, y in zip(a.args, b.args)))
    return cc.equal(a, b)


def _ground_equations(hyps: Iterable[Formula]) -> list[tuple[FolTerm, FolTerm]]:
    return [(h.left, h.right) for h in _sorted(hyps)
            if isinstance(h, Eq) and _ground(h.left) and _ground(h.right)]


# --------------------------------------------------------------------------
# Rewriting


def _orient(l: FolTerm, r: FolTerm, xs: frozenset) -> tuple[FolTerm, FolTerm] | None:
    """Left to right when the left side is strictly larger; ties stay put."""
    for a, b in ((l, r), (r, l)):
        if _term_size(a) > _term_size(b) and not isinstance(a, FVar):
            if set(fol.term_vars(b)) <= set(fol.term_vars(a)):
                return a, b
    return None


def _rewrite_rules(hyps: frozenset) -> list[tuple]:
    """Rules (xs, guards, lhs, rhs, source) from equational hypotheses."""
    rules = []
    for h in _sorted(hyps):
        xs, body = _block(h)
        guards = []
        while isinstance(body, Implies) and _is_atomic(body.left):
            guards.append(body.left)
            body = body.right
        if not isinstance(body, Eq):
            continue
        if not xs and guards:
            continue
        o = _orient(body.left, body.right, frozenset(xs))
        if o is not None:
            rules.append((frozenset(xs), tuple(guards), o[0], o[1], h))
    return rules


class _Rewriter:
    def __init__(self, hyps: frozenset, bound: int):
        self.rules = _rewrite_rules(hyps)
        self.hyps = hyps
        self.left = bound
        self.instances: dict[Formula, None] = {}

    def term(self, t: FolTerm) -> FolTerm:
        # outside-in: try the rules at the root before descending
        if self.left <= 0 or not isinstance(t, FFun):
            return t
        if _ground(t):
            for xs, guards, lhs, rhs, _ in self.rules:
                s = _match(lhs, t, xs, {})
                if s is None or set(xs) - set(s):
                    continue
                inst = [subst_formula(g, s) for g in guards]
                if not all(g in self.hyps for g in inst):
                    continue
                new = fol.subst_term(rhs, s)
                self.left -= 1
                self.instances.setdefault(Eq(t, new))
                return self.term(new)
        if not t.args:
            return t
        return FFun(t.name, tuple(self.term(a) for a in t.args))

    def formula(self, f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(f.pred, tuple(self.term(a) for a in f.args))
        if isinstance(f, Eq):
            return Eq(self.term(f.left), self.term(f.right))
        if isinstance(f, (And, Or, Implies)):
            return type(f)(self.formula(f.left), self.formula(f.right))
        if isinstance(f, (Forall, Exists)):
            return type(f)(f.var, self.formula(f.body))
        return f


def _rewrite(hyps: frozenset, goal: Formula, bound: int) -> tuple[frozenset, Formula, tuple]:
    rw = _Rewriter(hyps, bound)
    if not rw.rules:
        return hyps, goal, ()
    new_goal = rw.formula(goal)
    added = []
    for h in _sorted(hyps):
        if isinstance(h, Forall) or (isinstance(h, Eq) and _orient(h.left, h.right, frozenset())):
            continue
        h2 = rw.formula(h)
        if h2 != h:
            added.append(h2)
    instances = tuple(i for i in rw.instances if i not in hyps)
    return hyps | set(added) | set(instances), new_goal, instances


def rewrite_pass(s: Sequent, bound: int = 8) -> Sequent:
    """Rewrite the goal and hypotheses with the oriented equational hypotheses.

    Rewritten hypotheses and the ground equation instances used are added
    next to the originals.
    """
    hyps, goal, _ = _rewrite(s.hyps, s.goal, bound)
    return Sequent(hyps, goal)


# --------------------------------------------------------------------------
# Search


_PROP_MEMO: dict = {}

# instantiations tried per universal rule application
CANDIDATES = 16


class _Out(Exception):
    def __init__(self, reason: str):
        self.reason = reason


class _Search:
    def __init__(self, budget: Budget, first_order: bool, memo: dict | None = None):
        self.budget = budget
        self.fo = first_order
        self.deadline = time.monotonic() + budget.seconds
        self.memo = {} if memo is None else memo
        self.steps = 0
        self.cut = False
        self.cc_cache: dict = {}

    # closure -------------------------------------------------------------

    def _cc(self, hyps: frozenset) -> CongruenceClosure | None:
        if hyps in self.cc_cache:
            return self.cc_cache[hyps]
        eqs = _ground_equations(hyps) if self.fo else []
        cc = None
        if eqs:
            cc = CongruenceClosure()
            for l, r in eqs:
                cc.merge(l, r)
        self.cc_cache[hyps] = cc
        return cc

    def holds(self, hyps: frozenset, a: Formula) -> Formula | bool | None:
        """A hypothesis (or True) witnessing the atomic formula ``a``."""
        if a in hyps:
            return a
        if not self.fo:
            return None
        if isinstance(a, Eq):
            if a.left == a.right:
                return True
            if not (_ground(a.left) and _ground(a.right)):
                return None
            cc = self._cc(hyps)
            return True if cc is not None and cc.equal(a.left, a.right) else None
        cc = self._cc(hyps)
        if cc is None or not all(_ground(x) for x in a.args):
            return None
        for h in _sorted(hyps):
            if (isinstance(h, Atom) and h.pred == a.pred and len(h.args) == len(a.args)
                    and all(_ground(x) for x in h.args)
                    and all(cc.equal(x, y) for x, y in zip(h.args, a.args))):
                return h
        return None

    def closure(self, hyps: frozenset, goal: Formula) -> Step | None:
        if isinstance(goal, Top):
            return Step("top_R", hyps, goal)
        if BOTTOM in hyps:
            return Step("bot_L", hyps, goal, BOTTOM)
        if goal in hyps:
            return Step("axiom", hyps, goal, goal)
        if _is_atomic(goal):
            w = self.holds(hyps, goal)
            if w is not None:
                return Step("congruence", hyps, goal, None if w is True else w)
        return None

    # invertible rules ----------------------------------------------------

    def invertible(self, hyps: frozenset, goal: Formula):
        if isinstance(goal, Implies):
            return "imp_R", None, (), [(hyps | {goal.left}, goal.right)]
        if isinstance(goal, And):
            return "and_R", None, (), [(hyps, goal.left), (hyps, goal.right)]
        if isinstance(goal, Forall):
            e = _fresh_eigen(hyps, goal)
            return "all_R", None, (e,), [(hyps, _open_binder(goal, FFun(e)))]
        for h in _sorted(hyps):
            rest = hyps - {h}
            if isinstance(h, Top):
                return "top_L", h, (), [(rest, goal)]
            if isinstance(h, And):
                return "and_L", h, (), [(rest | {h.left, h.right}, goal)]
            if isinstance(h, Or):
                return "or_L", h, (), [(rest | {h.left}, goal), (rest | {h.right}, goal)]
            if isinstance(h, Exists):
                e = _fresh_eigen(hyps, goal)
                return "ex_L", h, (e,), [(rest | {_open_binder(h, FFun(e))}, goal)]
            if isinstance(h, Implies):
                a, b = h.left, h.right
                if isinstance(a, Bottom):
                    return "bot_imp_L", h, (), [(rest, goal)]
                if isinstance(a, Top):
                    return "top_imp_L", h, (), [(rest | {b}, goal)]
                if _is_atomic(a) and self.holds(rest, a) is not None:
                    return "atom_imp_L", h, (), [(rest | {b}, goal)]
                if isinstance(a, And):
                    return "and_imp_L", h, (), [(rest | {Implies(a.left, Implies(a.right, b))}, goal)]
                if isinstance(a, Or):
                    return "or_imp_L", h, (), [(rest | {Implies(a.left, b), Implies(a.right, b)}, goal)]
                if isinstance(a, Exists):
                    return "ex_imp_L", h, (), [(rest | {Forall(a.var, Implies(a.body, b))}, goal)]
        return None

    # instantiation candidates -------------------------------------------

    def ground_terms(self, hyps: frozenset, goal: Formula) -> list[FolTerm]:
        out: dict = {}
        _ground_subterms(goal, out)
        for h in _sorted(hyps):
            _ground_subterms(h, out)
        return sorted(out, key=lambda t: (_term_size(t), _key(t)))

    def instances(self, xs: list[str], body: Formula, concl_targets: list[Formula],
                  prem_targets: list[Formula], terms: list[FolTerm]) -> list[tuple]:
        xset = frozenset(xs)
        subs: list[dict] = []
        for p in _conclusions(body):
            for t in concl_targets:
                subs += _match_atoms(p, t, xset)
        for p in _premises(body):
            for t in prem_targets:
                subs += _match_atoms(p, t, xset)
        for p in _conclusions(body):
            if isinstance(p, Eq):
                for t in terms:
                    for side in (p.left, p.right):
                        if not isinstance(side, FVar):
                            s = _match(side, t, xset, {})
                            if s is not None:
                                subs.append(s)
        if not subs:
            subs = [{}]
        out: dict[tuple, int] = {}
        for s in subs:
            missing = [x for x in xs if x not in s]
            pools = [terms[:4] for _ in missing]
            for fill in itertools.product(*pools):
                full = dict(s)
                full.update(zip(missing, fill))
                ts = tuple(full[x] for x in xs)
                out[ts] = min(out.get(ts, len(xs)), len(missing))
        return sorted(((m, ts) for ts, m in out.items()), key=lambda p: p[0])

    def alternatives(self, hyps: frozenset, goal: Formula) -> Iterator[tuple]:
        if isinstance(goal, Or):
            yield "or_R1", None, (), [(hyps, goal.left)]
            yield "or_R2", None, (), [(hyps, goal.right)]
        terms = self.ground_terms(hyps, goal) if self.fo else []
        needed = [goal] if _is_atomic(goal) else []
        for h in _sorted(hyps):
            if isinstance(h, Implies) and _is_atomic(h.left) and _ground_formula(h.left):
                needed.append(h.left)
        facts = [h for h in _sorted(hyps) if _is_atomic(h)]
        if isinstance(goal, Exists):
            xs, body = [goal.var], goal.body
            for _, (t,) in self.instances(xs, body, facts, [], terms)[:CANDIDATES]:
                yield "ex_R", None, (t,), [(hyps, _open_binder(goal, t))]
        if self.fo:
            # candidates of every universal hypothesis, most specific first
            cands = []
            for i, h in enumerate(_sorted(hyps)):
                if not isinstance(h, Forall):
                    continue
                xs, body = _block(h)
                for missing, ts in self.instances(xs, body, needed, facts, terms):
                    inst = subst_formula(body, dict(zip(xs, ts)))
                    if inst not in hyps:
                        cands.append((missing, i, h, ts, inst))
            cands.sort(key=lambda c: (c[0], c[1]))
            for _, _, h, ts, inst in cands[:CANDIDATES]:
                yield "all_L", h, ts, [(hyps | {inst}, goal)]
        for h in _sorted(hyps):
            if isinstance(h, Implies) and isinstance(h.left, Implies):
                c, d, b = h.left.left, h.left.right, h.right
                rest = hyps - {h}
                yield "imp_imp_L", h, (), [(rest | {Implies(d, b)}, Implies(c, d)), (rest | {b}, goal)]
        if self.fo:
            for h in _sorted(hyps):
                if isinstance(h, Implies) and (_is_atomic(h.left) or isinstance(h.left, Forall)):
                    yield "imp_L", h, (), [(hyps, h.left), (hyps - {h} | {h.right}, goal)]
            new_hyps, new_goal, used = _rewrite(hyps, goal, self.budget.rewrite_bound)
            if (new_hyps, new_goal) != (hyps, goal):
                yield "rewrite", None, used, [(new_hyps, new_goal)]

    # driver --------------------------------------------------------------

    def tick(self) -> None:
        self.steps += 1
        if self.budget.max_steps is not None and self.steps > self.budget.max_steps:
            raise _Out("StepLimit")
        if self.steps % 256 == 0 and time.monotonic() > self.deadline:
            raise _Out("TimeOut")

    def prove(self, hyps: frozenset, goal: Formula, depth: float, path: frozenset) -> Step | None:
        key = (hyps, goal)
        hit = self.memo.get(key)
        if hit is not None:
            node, failed_at = hit
            if node is not None:
                return node
            if failed_at >= depth:
                return None
        if key in path:
            return None
        self.tick()
        node = self._prove(hyps, goal, depth, path | {key} if self.fo else path)
        if node is not None:
            self.memo[key] = (node, -1)
        elif not self.fo or self.memo.get(key, (None, -1))[1] < depth:
            self.memo[key] = (None, depth)
        return node

    def _prove(self, hyps: frozenset, goal: Formula, depth: float, path: frozenset) -> Step | None:
        done = self.closure(hyps, goal)
        if done is not None:
            return done
        inv = self.invertible(hyps, goal)
        if inv is not None:
            rule, principal, info, premises = inv
            kids = []
            for h, g in premises:
                k = self.prove(h, g, depth, path)
                if k is None:
                    return None
                kids.append(k)
            return Step(rule, hyps, goal, principal, info, tuple(kids))
        if depth <= 0:
            self.cut = True
            return None
        for rule, principal, info, premises in self.alternatives(hyps, goal):
            kids = []
            for h, g in premises:
                k = self.prove(h, g, depth - 1, path)
                if k is None:
                    break
                kids.append(k)
            else:
                return Step(rule, hyps, goal, principal, info, tuple(kids))
        return None


def _ground_formula(f: Formula) -> bool:
    return not fol.formula_free_vars(f)


def prove_seq(s: Sequent, budget: Budget = Budget()) -> ProofTrace | Fail:
    """Iterative deepening on non-invertible rule applications.

    ``budget.depth = None`` runs without a depth bound; on propositional
    sequents the calculus terminates without one.
    """
    hyps = frozenset(normalize(h) for h in s.hyps)
    goal = normalize(s.goal)
    fo = _first_order(goal) or any(_first_order(h) for h in hyps)
    if budget.depth is None and not fo:
        search = _Search(budget, False, _PROP_MEMO)
        if len(_PROP_MEMO) > 2_000_000:
            _PROP_MEMO.clear()
        try:
            node = search.prove(hyps, goal, float("inf"), frozenset())
        except _Out as out:
            return Fail(out.reason, search.steps)
        if node is None:
            return Fail("NoRule", search.steps)
        return ProofTrace(node, None, search.steps)
    limit = budget.depth if budget.depth is not None else 12
    search = _Search(budget, fo)
    try:
        for d in range(0, limit + 1):
            search.cut = False
            search.memo = {}
            node = search.prove(hyps, goal, d, frozenset())
            if node is not None:
                return ProofTrace(node, d, search.steps)
            if not search.cut:
                return Fail("NoRule", search.steps)
    except _Out as out:
        return Fail(out.reason, search.steps)
    return Fail("DepthExhausted", search.steps)


# --------------------------------------------------------------------------
# Independent trace checker


def _congruent_formulas(a: Formula, b: Formula, eqs: list) -> bool:
    """Same shape, with atom arguments equal modulo the ground equations."""
    from .oracle import ground_atoms_congruent, ground_congruent

    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        return a == b or ground_atoms_congruent(eqs, a, b)
    if isinstance(a, Eq):
        if a == b:
            return True
        return (ground_congruent(eqs, a.left, b.left) and ground_congruent(eqs, a.right, b.right))
    if isinstance(a, (Top, Bottom)):
        return True
    if isinstance(a, (And, Or, Implies)):
        return _congruent_formulas(a.left, b.left, eqs) and _congruent_formulas(a.right, b.right, eqs)
    if isinstance(a, (Forall, Exists)):
        return a.var == b.var and _congruent_formulas(a.body, b.body, eqs)
    return a == b


def _atom_holds(hyps: frozenset, a: Formula) -> bool:
    from .oracle import ground_atoms_congruent, ground_congruent

    if a in hyps:
        return True
    eqs = _ground_equations(hyps)
    if isinstance(a, Eq):
        return a.left == a.right or (_ground(a.left) and _ground(a.right)
                                     and ground_congruent(eqs, a.left, a.right))
    if not eqs or not all(_ground(x) for x in a.args):
        return False
    return any(isinstance(h, Atom) and all(_ground(x) for x in h.args)
               and ground_atoms_congruent(eqs, h, a) for h in hyps)


def _eq_instance_derivable(inst: Formula, hyps: frozenset) -> bool:
    if inst in hyps:
        return True
    for h in hyps:
        xs, body = _block(h)
        guards = []
        while isinstance(body, Implies) and _is_atomic(body.left):
            guards.append(body.left)
            body = body.right
        if not isinstance(body, Eq):
            continue
        xset = frozenset(xs)
        for s in _match_atoms(body, inst, xset):
            if set(s) != xset and xs:
                continue
            if subst_formula(body, s) != inst:
                continue
            if all(subst_formula(g, s) in hyps for g in guards):
                return True
    return False


def _fresh_in(name: str, hyps: frozenset, goal: Formula) -> bool:
    used: set[str] = set()
    for h in hyps:
        _symbols(h, used)
    _symbols(goal, used)
    return name not in used


def _expected(step: Step) -> list[tuple[frozenset, Formula]] | None:
    """Premises the rule of ``step`` produces, or None if it does not apply."""
    H, G, h, info = step.hyps, step.goal, step.principal, step.info
    r = step.rule
    if h is not None and h not in H:
        return None
    rest = H - {h} if h is not None else H
    if r == "top_R":
        return [] if isinstance(G, Top) else None
    if r == "bot_L":
        return [] if BOTTOM in H else None
    if r == "axiom":
        return [] if G in H else None
    if r == "congruence":
        from .oracle import ground_atoms_congruent, ground_congruent

        eqs = _ground_equations(H)
        if isinstance(G, Eq):
            return [] if G.left == G.right or ground_congruent(eqs, G.left, G.right) else None
        if isinstance(G, Atom) and isinstance(h, Atom) and h in H:
            return [] if ground_atoms_congruent(eqs, h, G) else None
        return None
    if r == "imp_R" and isinstance(G, Implies):
        return [(H | {G.left}, G.right)]
    if r == "and_R" and isinstance(G, And):
        return [(H, G.left), (H, G.right)]
    if r == "all_R" and isinstance(G, Forall) and len(info) == 1 and _fresh_in(info[0], H, G):
        return [(H, _open_binder(G, FFun(info[0])))]
    if r == "or_R1" and isinstance(G, Or):
        return [(H, G.left)]
    if r == "or_R2" and isinstance(G, Or):
        return [(H, G.right)]
    if r == "ex_R" and isinstance(G, Exists) and len(info) == 1 and _ground(info[0]):
        return [(H, _open_binder(G, info[0]))]
    if r == "top_L" and isinstance(h, Top):
        return [(rest, G)]
    if r == "and_L" and isinstance(h, And):
        return [(rest | {h.left, h.right}, G)]
    if r == "or_L" and isinstance(h, Or):
        return [(rest | {h.left}, G), (rest | {h.right}, G)]
    if r == "ex_L" and isinstance(h, Exists) and len(info) == 1 and _fresh_in(info[0], H, G):
        return [(rest | {_open_binder(h, FFun(info[0]))}, G)]
    if r == "all_L" and isinstance(h, Forall):
        xs, body = _block(h)
        if len(info) != len(xs) or not all(_ground(t) for t in info):
            return None
        return [(H | {subst_formula(body, dict(zip(xs, info)))}, G)]
    if isinstance(h, Implies):
        a, b = h.left, h.right
        if r == "bot_imp_L" and isinstance(a, Bottom):
            return [(rest, G)]
        if r == "top_imp_L" and isinstance(a, Top):
            return [(rest | {b}, G)]
        if r == "atom_imp_L" and _is_atomic(a) and _atom_holds(rest, a):
            return [(rest | {b}, G)]
        if r == "and_imp_L" and isinstance(a, And):
            return [(rest | {Implies(a.left, Implies(a.right, b))}, G)]
        if r == "or_imp_L" and isinstance(a, Or):
            return [(rest | {Implies(a.left, b), Implies(a.right, b)}, G)]
        if r == "ex_imp_L" and isinstance(a, Exists) and a.var not in fol.formula_free_vars(b):
            return [(rest | {Forall(a.var, Implies(a.body, b))}, G)]
        if r == "imp_imp_L" and isinstance(a, Implies):
            return [(rest | {Implies(a.right, b)}, a), (rest | {b}, G)]
        if r == "imp_L":
            return [(H, a), (rest | {b}, G)]
    if r == "rewrite" and h is None:
        if not all(isinstance(i, Eq) and _ground(i.left) and _ground(i.right)
                   and _eq_instance_derivable(i, H) for i in info):
            return None
        if len(step.children) != 1:
            return None
        child = step.children[0]
        eqs = _ground_equations(H) + [(i.left, i.right) for i in info]
        if not H <= child.hyps:
            return None
        for extra in child.hyps - H:
            if extra in info:
                continue
            if not any(_congruent_formulas(extra, old, eqs) for old in H):
                return None
        if not _congruent_formulas(child.goal, G, eqs):
            return None
        return [(child.hyps, child.goal)]
    return None


def check_trace(trace: ProofTrace | Step) -> bool:
    """Replay every step against the rule table; raises TraceError on a bad step."""
    stack = [trace.root if isinstance(trace, ProofTrace) else trace]
    while stack:
        step = stack.pop()
        want = _expected(step)
        if want is None:
            raise TraceError(f"rule {step.rule} does not apply")
        got = [(c.hyps, c.goal) for c in step.children]
        if got != want:
            raise TraceError(f"premises of {step.rule} do not match")
        stack.extend(step.children)
    return True


# --------------------------------------------------------------------------
# Serialization


def term_to_json(t: FolTerm) -> list:
    if isinstance(t, FVar):
        return ["v", t.name]
    return ["f", t.name, [term_to_json(a) for a in t.args]]


def term_from_json(d: list) -> FolTerm:
    if d[0] == "v":
        return FVar(d[1])
    return FFun(d[1], tuple(term_from_json(a) for a in d[2]))


_BIN = {And: "and", Or: "or", Implies: "imp", Iff: "iff"}
_BIN_BACK = {v: k for k, v in _BIN.items()}


def formula_to_json(f: Formula) -> list:
    if isinstance(f, Atom):
        return ["atom", f.pred, [term_to_json(a) for a in f.args]]
    if isinstance(f, Eq):
        return ["eq", term_to_json(f.left), term_to_json(f.right)]
    if isinstance(f, Top):
        return ["top"]
    if isinstance(f, Bottom):
        return ["bot"]
    if isinstance(f, Not):
        return ["not", formula_to_json(f.body)]
    if isinstance(f, (And, Or, Implies, Iff)):
        return [_BIN[type(f)], formula_to_json(f.left), formula_to_json(f.right)]
    if isinstance(f, Forall):
        return ["all", f.var, formula_to_json(f.body)]
    if isinstance(f, Exists):
        return ["ex", f.var, formula_to_json(f.body)]
    raise TypeError(f)


def formula_from_json(d: list) -> Formula:
    tag = d[0]
    if tag == "atom":
        return Atom(d[1], tuple(term_from_json(a) for a in d[2]))
    if tag == "eq":
        return Eq(term_from_json(d[1]), term_from_json(d[2]))
    if tag == "top":
        return fol.TOP
    if tag == "bot":
        return BOTTOM
    if tag == "not":
        return Not(formula_from_json(d[1]))
    if tag in _BIN_BACK:
        return _BIN_BACK[tag](formula_from_json(d[1]), formula_from_json(d[2]))
    if tag == "all":
        return Forall(d[1], formula_from_json(d[2]))
    if tag == "ex":
        return Exists(d[1], formula_from_json(d[2]))
    raise ValueError(f"unknown formula tag {tag!r}")


def _info_to_json(x) -> list:
    if isinstance(x, str):
        return ["name", x]
    if isinstance(x, (FVar, FFun)):
        return ["term", term_to_json(x)]
    return ["formula", formula_to_json(x)]


def _info_from_json(d: list):
    if d[0] == "name":
        return d[1]
    if d[0] == "term":
        return term_from_json(d[1])
    return formula_from_json(d[1])


def step_to_json(s: Step) -> dict:
    return {
        "rule": s.rule,
        "hyps": [formula_to_json(h) for h in _sorted(s.hyps)],
        "goal": formula_to_json(s.goal),
        "principal": None if s.principal is None else formula_to_json(s.principal),
        "info": [_info_to_json(x) for x in s.info],
        "children": [step_to_json(c) for c in s.children],
    }


def step_from_json(d: dict) -> Step:
    return Step(
        d["rule"],
        frozenset(formula_from_json(h) for h in d["hyps"]),
        formula_from_json(d["goal"]),
        None if d["principal"] is None else formula_from_json(d["principal"]),
        tuple(_info_from_json(x) for x in d["info"]),
        tuple(step_from_json(c) for c in d["children"]),
    )


def trace_to_text(t: ProofTrace) -> str:
    return json.dumps({"depth": t.depth, "root": step_to_json(t.root)}, sort_keys=True) + "\n"


def trace_from_text(text: str) -> ProofTrace:
    d = json.loads(text)
    return ProofTrace(step_from_json(d["root"]), d.get("depth"))


# --------------------------------------------------------------------------
# From type theory to sequents


def _iota(env: Environment, t: Term) -> Term:
    """Reduce case expressions whose scrutinee is a constructor application."""
    head, args = spine(t)
    if isinstance(head, Case):
        scrut = _iota(env, head.scrutinee)
        c_head, c_args = spine(scrut)
        ind = env.inductive(head.ind) if isinstance(c_head, Const) else None
        if ind is not None and c_head.name in ind.constructor_names:
            k = ind.constructor_names.index(c_head.name)
            if k < len(head.branches):
                reduced = apply(head.branches[k], c_args[head.n_params:])
                return _iota(env, beta_normalize(apply(reduced, args)))
        head = Case(head.ind, head.n_params, scrut, _iota(env, head.return_pred),
                    tuple(_iota(env, b) for b in head.branches))
    elif isinstance(head, (Lambda, Pi)):
        head = type(head)(head.binder, _iota(env, head.binder_type), _iota(env, head.body))
    return apply(head, [_iota(env, a) for a in args])


def simplify_term(env: Environment, t: Term, unfolds: Iterable[str]) -> Term:
    """Delta-unfold exactly ``unfolds``, then beta and iota normalize."""
    t = unfold(t, env, list(unfolds))
    for _ in range(8):
        t2 = _iota(env, beta_normalize(t))
        if t2 == t:
            break
        t = t2
    return t


def _structural(st: EncoderState, d: Inductive) -> list[Formula]:
    from .translate import translate_inductive

    axioms = translate_inductive(st, d)
    return [a.formula for a in axioms if a.kind in ("injectivity", "discrimination", "inversion")]


def _typing_axioms(env: Environment, names: Iterable[str]) -> list[Formula]:
    from .translate import translate_decl

    out = []
    for n in names:
        if n not in env:
            continue
        d = env.owner(n)
        st = EncoderState(env)
        for a in translate_decl(st, d):
            if a.kind == "typing" and (a.label == n or a.label == f"{n}_type"):
                out.append(a.formula)
    return out


def flatten_goal(env: Environment, stmt: Term, hints: Hints = Hints()) -> Sequent:
    """The sequent whose hypotheses are the hint lemmas and whose goal is ``stmt``."""
    if sort_of_type_of(env, (), stmt) is not Sort.PROP:
        raise NotAProp("statement is not a proposition")
    st = EncoderState(env)
    st.source = "goal"
    goal = encode_prop(st, (), simplify_term(env, stmt, hints.unfolds))
    hyps: list[Formula] = []
    for name in hints.lemmas:
        if name not in env:
            raise UnknownLemma(name)
        d = env.owner(name)
        if isinstance(d, Inductive) and name == d.name:
            hyps += _structural(st, d)
            continue
        ty = env.type_of(name)
        if sort_of_type_of(env, (), ty) is not Sort.PROP:
            raise UnknownLemma(f"{name} is not a lemma")
        st.source = name
        hyps.append(encode_prop(st, (), simplify_term(env, ty, hints.unfolds)))
    hyps += [a.formula for a in st.drain()]
    symbols: set[str] = set()
    for f in hyps + [goal]:
        _symbols(f, symbols)
    hyps += _typing_axioms(env, sorted(symbols))
    hyps = [normalize(fol.simplify(h)) for h in hyps]
    return Sequent(frozenset(h for h in hyps if not isinstance(h, Top)),
                   normalize(fol.simplify(goal)))


def statement_of(env: Environment, name: str) -> Term:
    if name not in env:
        raise UnknownLemma(name)
    return env.type_of(name)


def hints_from_used(p: fol.Problem, used: Iterable[str], env: Environment | None = None) -> Hints:
    """Hints from the labels an ATP proof used.

    Lemmas and structural axioms of inductives become lemmas; definitions
    and axioms lifted out of a definition's body become unfolds; typing
    axioms are implied by the encoding and dropped. Without ``env`` every
    lifted axiom not coming from the conjecture counts as an unfold.
    """
    used = set(used)
    lemmas: dict[str, None] = {}
    unfolds: dict[str, None] = {}
    for a in p.axioms:
        if a.label not in used or not a.source:
            continue
        if a.kind in ("lemma", "injectivity", "discrimination", "inversion"):
            lemmas.setdefault(a.source)
        elif a.kind == "definition":
            unfolds.setdefault(a.source)
        elif a.kind == "lifted" and a.source != p.conjecture.source:
            if env is None:
                unfolds.setdefault(a.source)
            elif a.source in env and env.definition(a.source) is not None:
                d = env.definition(a.source)
                if sort_of_type_of(env, (), d.type) is not Sort.PROP:
                    unfolds.setdefault(a.source)
    return Hints(tuple(lemmas), tuple(unfolds))


def reconstruct(env: Environment, name: str, hints: Hints = Hints(),
                budget: Budget = Budget()) -> ProofTrace | Fail:
    """Flatten, search, and replay the trace through the checker."""
    s = flatten_goal(env, statement_of(env, name), hints)
    out = prove_seq(s, budget)
    if isinstance(out, ProofTrace):
        check_trace(out)
    return out
