"""Untyped first-order logic with equality, TPTP FOF emission and SZS parsing."""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

# Distinguished symbols: provability of a proposition, typing, application.
P = "P"
T = "T"
AP = "@"


@dataclass(frozen=True)
class FVar:
    name: str


@dataclass(frozen=True)
class FFun:
    name: str
    args: tuple[FolTerm, ...] = ()


FolTerm = Union[FVar, FFun]


@dataclass(frozen=True)
class Atom:
    pred: str
    args: tuple[FolTerm, ...] = ()


@dataclass(frozen=True)
class Eq:
    left: FolTerm
    right: FolTerm


@dataclass(frozen=True)
class Top:
    pass


@dataclass(frozen=True)
class Bottom:
    pass


@dataclass(frozen=True)
class Not:
    body: Formula


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Forall:
    var: str
    body: Formula


@dataclass(frozen=True)
class Exists:
    var: str
    body: Formula


Formula = Union[Atom, Eq, Top, Bottom, Not, And, Or, Implies, Iff, Forall, Exists]


def _memo_hash(cls) -> None:
    """Cache the structural hash on each instance; terms are hashed a lot."""
    names = [f.name for f in dataclasses.fields(cls)]
    tag = cls.__name__

    def __hash__(self):
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash((tag, *[getattr(self, n) for n in names]))
            object.__setattr__(self, "_hash", h)
        return h

    def __getstate__(self):
        # string hashes differ between processes; never ship the cache
        return {k: v for k, v in self.__dict__.items() if k != "_hash"}

    cls.__hash__ = __hash__
    cls.__getstate__ = __getstate__


for _cls in (FVar, FFun, Atom, Eq, Top, Bottom, Not, And, Or, Implies, Iff, Forall, Exists):
    _memo_hash(_cls)

TOP = Top()
BOTTOM = Bottom()

BINARY = (And, Or, Implies, Iff)
QUANT = (Forall, Exists)


def const(name: str) -> FFun:
    return FFun(name, ())


def ap(f: FolTerm, *args: FolTerm) -> FolTerm:
    for a in args:
        f = FFun(AP, (f, a))
    return f


def prf(t: FolTerm) -> Atom:
    return Atom(P, (t,))


def typed(t: FolTerm, ty: FolTerm) -> Atom:
    return Atom(T, (t, ty))


def conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = And(f, out)
    return out


def disj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return BOTTOM
    out = fs[-1]
    for f in reversed(fs[:-1]):
        out = Or(f, out)
    return out


def forall(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Forall(v, body)
    return body


def exists(vars: Iterable[str], body: Formula) -> Formula:
    for v in reversed(list(vars)):
        body = Exists(v, body)
    return body


# --------------------------------------------------------------------------
# Traversals


def term_vars(t: FolTerm, out: dict[str, None] | None = None) -> dict[str, None]:
    out = {} if out is None else out
    if isinstance(t, FVar):
        out.setdefault(t.name)
    else:
        for a in t.args:
            term_vars(a, out)
    return out


def formula_free_vars(f: Formula) -> list[str]:
    out: dict[str, None] = {}
    _ffv(f, frozenset(), out)
    return list(out)


def _ffv(f: Formula, bound: frozenset[str], out: dict[str, None]) -> None:
    if isinstance(f, Atom):
        for a in f.args:
            for v in term_vars(a):
                if v not in bound:
                    out.setdefault(v)
    elif isinstance(f, Eq):
        for a in (f.left, f.right):
            for v in term_vars(a):
                if v not in bound:
                    out.setdefault(v)
    elif isinstance(f, Not):
        _ffv(f.body, bound, out)
    elif isinstance(f, BINARY):
        _ffv(f.left, bound, out)
        _ffv(f.right, bound, out)
    elif isinstance(f, QUANT):
        _ffv(f.body, bound | {f.var}, out)


def subterms(t: FolTerm) -> Iterator[FolTerm]:
    yield t
    if isinstance(t, FFun):
        for a in t.args:
            yield from subterms(a)


def formula_terms(f: Formula) -> Iterator[FolTerm]:
    """Top-level argument terms of every atom and equation."""
    if isinstance(f, Atom):
        yield from f.args
    elif isinstance(f, Eq):
        yield f.left
        yield f.right
    elif isinstance(f, Not):
        yield from formula_terms(f.body)
    elif isinstance(f, BINARY):
        yield from formula_terms(f.left)
        yield from formula_terms(f.right)
    elif isinstance(f, QUANT):
        yield from formula_terms(f.body)


def term_size(t: FolTerm) -> int:
    if isinstance(t, FVar):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def subst_term(t: FolTerm, s: dict[str, FolTerm]) -> FolTerm:
    if isinstance(t, FVar):
        return s.get(t.name, t)
    if not t.args:
        return t
    return FFun(t.name, tuple(subst_term(a, s) for a in t.args))


def subst_formula(f: Formula, s: dict[str, FolTerm]) -> Formula:
    """Capture-avoiding substitution of terms for free variables."""
    if not s:
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(subst_term(a, s) for a in f.args))
    if isinstance(f, Eq):
        return Eq(subst_term(f.left, s), subst_term(f.right, s))
    if isinstance(f, (Top, Bottom)):
        return f
    if isinstance(f, Not):
        return Not(subst_formula(f.body, s))
    if isinstance(f, BINARY):
        return type(f)(subst_formula(f.left, s), subst_formula(f.right, s))
    if isinstance(f, QUANT):
        s2 = {k: v for k, v in s.items() if k != f.var}
        if not s2:
            return f
        incoming: dict[str, None] = {}
        for v in s2.values():
            term_vars(v, incoming)
        var, body = f.var, f.body
        if var in incoming:
            avoid = set(incoming) | set(formula_free_vars(body)) | set(s2)
            new = var
            while new in avoid:
                new += "'"
            body = subst_formula(body, {var: FVar(new)})
            var = new
        return type(f)(var, subst_formula(body, s2))
    raise TypeError(f)


def formula_symbols(f: Formula, funs: dict, preds: dict) -> None:
    """Collect ``name -> set of arities`` for functions and predicates."""
    if isinstance(f, Atom):
        preds.setdefault(f.pred, set()).add(len(f.args))
        for a in f.args:
            _term_symbols(a, funs)
    elif isinstance(f, Eq):
        _term_symbols(f.left, funs)
        _term_symbols(f.right, funs)
    elif isinstance(f, Not):
        formula_symbols(f.body, funs, preds)
    elif isinstance(f, BINARY):
        formula_symbols(f.left, funs, preds)
        formula_symbols(f.right, funs, preds)
    elif isinstance(f, QUANT):
        formula_symbols(f.body, funs, preds)


def _term_symbols(t: FolTerm, funs: dict) -> None:
    if isinstance(t, FFun):
        funs.setdefault(t.name, set()).add(len(t.args))
        for a in t.args:
            _term_symbols(a, funs)


def alpha_eq_formula(a: Formula, b: Formula) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha_term(a: FolTerm, b: FolTerm, ma: dict, mb: dict) -> bool:
    if isinstance(a, FVar) and isinstance(b, FVar):
        ia, ib = ma.get(a.name), mb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, FFun) and isinstance(b, FFun):
        return (a.name == b.name and len(a.args) == len(b.args)
                and all(_alpha_term(x, y, ma, mb) for x, y in zip(a.args, b.args)))
    return False


def _alpha(a: Formula, b: Formula, ma: dict, mb: dict, depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Atom):
        return (a.pred == b.pred and len(a.args) == len(b.args)
                and all(_alpha_term(x, y, ma, mb) for x, y in zip(a.args, b.args)))
    if isinstance(a, Eq):
        return _alpha_term(a.left, b.left, ma, mb) and _alpha_term(a.right, b.right, ma, mb)
    if isinstance(a, (Top, Bottom)):
        return True
    if isinstance(a, Not):
        return _alpha(a.body, b.body, ma, mb, depth)
    if isinstance(a, BINARY):
        return _alpha(a.left, b.left, ma, mb, depth) and _alpha(a.right, b.right, ma, mb, depth)
    if isinstance(a, QUANT):
        return _alpha(a.body, b.body, {**ma, a.var: depth}, {**mb, b.var: depth}, depth + 1)
    raise TypeError(a)


# --------------------------------------------------------------------------
# Simplification


def simplify(f: Formula) -> Formula:
    """Remove truth-constant units and vacuous quantifiers.

    Every rewrite is valid intuitionistically; double negations are kept.
    """
    if isinstance(f, (Atom, Eq, Top, Bottom)):
        return f
    if isinstance(f, Not):
        b = simplify(f.body)
        if isinstance(b, Top):
            return BOTTOM
        if isinstance(b, Bottom):
            return TOP
        return Not(b)
    if isinstance(f, QUANT):
        b = simplify(f.body)
        if f.var not in formula_free_vars(b):
            return b
        return type(f)(f.var, b)
    left, right = simplify(f.left), simplify(f.right)
    if isinstance(f, And):
        if isinstance(left, Top):
            return right
        if isinstance(right, Top):
            return left
        if isinstance(left, Bottom) or isinstance(right, Bottom):
            return BOTTOM
        return And(left, right)
    if isinstance(f, Or):
        if isinstance(left, Bottom):
            return right
        if isinstance(right, Bottom):
            return left
        if isinstance(left, Top) or isinstance(right, Top):
            return TOP
        return Or(left, right)
    if isinstance(f, Implies):
        if isinstance(right, Top) or isinstance(left, Bottom):
            return TOP
        if isinstance(left, Top):
            return right
        if isinstance(right, Bottom):
            return Not(left)
        return Implies(left, right)
    if isinstance(f, Iff):
        if isinstance(left, Top):
            return right
        if isinstance(right, Top):
            return left
        if isinstance(left, Bottom):
            return simplify(Not(right))
        if isinstance(right, Bottom):
            return simplify(Not(left))
        return Iff(left, right)
    raise TypeError(f)


# --------------------------------------------------------------------------
# Problems


class Role(enum.Enum):
    AXIOM = "axiom"
    DEFINITION = "definitionAxiom"
    LIFTED = "liftedAxiom"
    CONJECTURE = "conjecture"


TPTP_ROLE = {
    Role.AXIOM: "axiom",
    Role.DEFINITION: "definition",
    Role.LIFTED: "hypothesis",
    Role.CONJECTURE: "conjecture",
}


@dataclass(frozen=True)
class LabeledAxiom:
    """A labeled formula.

    ``source`` names the declaration the axiom was generated from and
    ``kind`` says how (``lemma``, ``typing``, ``definition``,
    ``injectivity``, ``discrimination``, ``inversion``, ``lifted`` or
    ``conjecture``); both are used to map prover output back to hints.
    """

    label: str
    role: Role
    formula: Formula
    source: str = ""
    kind: str = ""


@dataclass(frozen=True)
class Problem:
    axioms: tuple[LabeledAxiom, ...]
    conjecture: LabeledAxiom

    def labels(self) -> list[str]:
        return [a.label for a in self.axioms] + [self.conjecture.label]

    def formulas(self) -> list[Formula]:
        return [a.formula for a in self.axioms] + [self.conjecture.formula]

    def by_label(self, label: str) -> LabeledAxiom:
        for a in self.all():
            if a.label == label:
                return a
        raise KeyError(label)

    def all(self) -> list[LabeledAxiom]:
        return list(self.axioms) + [self.conjecture]


class ArityClash(ValueError):
    def __init__(self, name: str, first: tuple[str, str, int], second: tuple[str, str, int]):
        self.name = name
        self.first = first
        self.second = second
        super().__init__(
            f"symbol {name!r} used as {first[1]}/{first[2]} in {first[0]} "
            f"and as {second[1]}/{second[2]} in {second[0]}")


def check_arities(p: Problem | Iterable[LabeledAxiom]) -> None:
    seen: dict[str, tuple[str, str, int]] = {}
    for ax in (p.all() if isinstance(p, Problem) else p):
        funs: dict = {}
        preds: dict = {}
        formula_symbols(ax.formula, funs, preds)
        uses = [(n, "function", a) for n, ars in funs.items() for a in sorted(ars)]
        uses += [(n, "predicate", a) for n, ars in preds.items() for a in sorted(ars)]
        for name, kind, arity in uses:
            here = (ax.label, kind, arity)
            prev = seen.setdefault(name, here)
            if prev[1:] != here[1:]:
                raise ArityClash(name, prev, here)


# --------------------------------------------------------------------------
# TPTP emission

_LOWER_WORD = re.compile(r"[a-z][A-Za-z0-9_]*\Z")
_WORD = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")
RESERVED = {P: "p", T: "t", AP: "ap"}


def _quote(name: str) -> str:
    return "'" + name.replace("\\", "\\\\").replace("'", "\\'") + "'"


def _candidate(name: str) -> str:
    stripped = name.lstrip("'")
    if _WORD.match(stripped):
        return stripped[0].lower() + stripped[1:]
    return _quote(name)


def _short_hash(name: str) -> str:
    return hashlib.sha1(name.encode("utf-8")).hexdigest()[:6]


def mangle_names(names: Iterable[str], taken: Iterable[str] = ()) -> dict[str, str]:
    """Injective map from identifiers to TPTP atoms.

    A name keeps its candidate spelling (first letter lowercased, leading
    quotes dropped) unless another name shares it; then every name whose
    spelling differs from the candidate gets a hash suffix.  Names outside
    the lower-word alphabet are single-quoted.
    """
    names = sorted(set(names))
    taken = set(taken)
    groups: dict[str, list[str]] = {}
    for n in names:
        groups.setdefault(_candidate(n), []).append(n)
    out = {}
    for cand, members in groups.items():
        if len(members) == 1 and cand not in taken:
            out[members[0]] = cand
            continue
        for n in members:
            if n == cand and cand not in taken:
                out[n] = cand
            elif cand.startswith("'"):
                out[n] = _quote(n + "_" + _short_hash(n))
            else:
                out[n] = f"{cand}_{_short_hash(n)}"
    return out


def _var_name(name: str, used: set[str]) -> str:
    base = re.sub(r"[^A-Za-z0-9_]", "_", name.lstrip("'")) or "X"
    base = base[0].upper() + base[1:] if base[0].isalpha() else "X" + base
    cand, i = base, 0
    while cand in used:
        i += 1
        cand = f"{base}{i}"
    return cand


class _Emitter:
    def __init__(self, symbols: dict[str, str]):
        self.symbols = symbols

    def term(self, t: FolTerm, env: dict[str, str]) -> str:
        if isinstance(t, FVar):
            return env[t.name]
        name = self.symbols[t.name]
        if not t.args:
            return name
        return f"{name}({','.join(self.term(a, env) for a in t.args)})"

    def formula(self, f: Formula, env: dict[str, str], top: bool = False) -> str:
        if isinstance(f, Atom):
            name = self.symbols[f.pred]
            if not f.args:
                return name
            return f"{name}({','.join(self.term(a, env) for a in f.args)})"
        if isinstance(f, Eq):
            return f"{self.term(f.left, env)} = {self.term(f.right, env)}"
        if isinstance(f, Top):
            return "$true"
        if isinstance(f, Bottom):
            return "$false"
        if isinstance(f, Not):
            return "~" + self.unit(f.body, env)
        if isinstance(f, QUANT):
            sym = "!" if isinstance(f, Forall) else "?"
            names = []
            env = dict(env)
            body = f
            while isinstance(body, type(f)):
                v = _var_name(body.var, set(env.values()))
                env[body.var] = v
                names.append(v)
                body = body.body
            return f"{sym}[{','.join(names)}]: {self.unit(body, env)}"
        op = {And: "&", Or: "|", Implies: "=>", Iff: "<=>"}[type(f)]
        parts = [f.left, f.right]
        if isinstance(f, (And, Or)):
            parts = _flatten(f)
        s = f" {op} ".join(self.unit(x, env) for x in parts)
        return s if top else f"({s})"

    def unit(self, f: Formula, env: dict[str, str]) -> str:
        """Formula in a position that needs a TPTP unitary formula."""
        if isinstance(f, Eq):
            return f"({self.formula(f, env)})"
        return self.formula(f, env)


def _flatten(f: Formula) -> list[Formula]:
    if isinstance(f, type(f)) and isinstance(f, (And, Or)):
        out = []
        for side in (f.left, f.right):
            if type(side) is type(f):
                out.extend(_flatten(side))
            else:
                out.append(side)
        return out
    return [f]


def close_formula(f: Formula) -> Formula:
    return forall(formula_free_vars(f), f)


@dataclass
class Mangling:
    symbols: dict[str, str] = field(default_factory=dict)
    labels: dict[str, str] = field(default_factory=dict)

    def label_of(self, tptp_label: str) -> str | None:
        """Original label of a (possibly unquoted) TPTP label."""
        for k, v in self.labels.items():
            if _unquote(v) == _unquote(tptp_label):
                return k
        return None


def mangling(p: Problem | Iterable[LabeledAxiom]) -> Mangling:
    axioms = p.all() if isinstance(p, Problem) else list(p)
    funs: dict = {}
    preds: dict = {}
    for a in axioms:
        formula_symbols(a.formula, funs, preds)
    user = (set(funs) | set(preds)) - set(RESERVED)
    symbols = mangle_names(user, taken=RESERVED.values())
    symbols.update(RESERVED)
    labels = mangle_names(a.label for a in axioms)
    return Mangling(symbols, labels)


def to_tptp(p: Problem, header: bool = True) -> str:
    """Serialize a Problem as TPTP FOF.

    Each formula is preceded by a comment line recording its original
    label, source declaration and kind, so that prover output can be
    mapped back to hints.
    """
    check_arities(p)
    lines = []
    if header:
        lines.append(f"% {len(p.axioms)} axioms, conjecture {p.conjecture.label}")
    return "\n".join(lines + _fof_lines(p.all())) + "\n"


def axioms_to_tptp(axioms: Iterable[LabeledAxiom]) -> str:
    """Serialize a list of axioms without a conjecture."""
    axioms = list(axioms)
    check_arities(axioms)
    return "\n".join(_fof_lines(axioms)) + "\n"


def _fof_lines(axioms: list[LabeledAxiom]) -> list[str]:
    m = mangling(axioms)
    em = _Emitter(m.symbols)
    lines = []
    for ax in axioms:
        text = em.formula(close_formula(ax.formula), {}, top=True)
        lines.append(f"% {ax.kind or '-'} {ax.label} {ax.source or '-'}")
        lines.append(f"fof({m.labels[ax.label]}, {TPTP_ROLE[ax.role]}, {text}).")
    return lines


def mangle_problem(p: Problem) -> Problem:
    """The Problem as the TPTP reader sees it: mangled names, closed formulas."""
    m = mangling(p)

    def mt(t: FolTerm) -> FolTerm:
        if isinstance(t, FVar):
            return t
        return FFun(m.symbols[t.name], tuple(mt(a) for a in t.args))

    def mf(f: Formula) -> Formula:
        if isinstance(f, Atom):
            return Atom(m.symbols[f.pred], tuple(mt(a) for a in f.args))
        if isinstance(f, Eq):
            return Eq(mt(f.left), mt(f.right))
        if isinstance(f, (Top, Bottom)):
            return f
        if isinstance(f, Not):
            return Not(mf(f.body))
        if isinstance(f, BINARY):
            return type(f)(mf(f.left), mf(f.right))
        return type(f)(f.var, mf(f.body))

    def ma(a: LabeledAxiom) -> LabeledAxiom:
        return LabeledAxiom(m.labels[a.label], a.role, mf(close_formula(a.formula)), a.source, a.kind)

    return Problem(tuple(ma(a) for a in p.axioms), ma(p.conjecture))


# --------------------------------------------------------------------------
# TPTP reading (our own emissions)

_TPTP_TOKEN = re.compile(
    r"\s+|%[^\n]*|<=>|<~>|=>|<=|!=|~\||~&|[()\[\],:.!?~&|=]"
    r"|\$[a-z]+|'(?:\\.|[^'\\])*'|[A-Za-z0-9_]+"
)


class TptpSyntaxError(ValueError):
    pass


def _tptp_tokens(text: str) -> list[str]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TPTP_TOKEN.match(text, pos)
        if not m:
            raise TptpSyntaxError(f"bad character at offset {pos}: {text[pos:pos + 20]!r}")
        tok = m.group()
        pos = m.end()
        if not tok.isspace() and not tok.startswith("%"):
            toks.append(tok)
    return toks


def _unquote(tok: str) -> str:
    if tok.startswith("'"):
        inner = tok[1:-1]
        return re.sub(r"\\(.)", r"\1", inner)
    return tok


class _TptpParser:
    def __init__(self, toks: list[str]):
        self.toks = toks
        self.i = 0

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect: str | None = None) -> str:
        tok = self.peek()
        if tok is None or (expect is not None and tok != expect):
            raise TptpSyntaxError(f"expected {expect!r}, found {tok!r}")
        self.i += 1
        return tok

    def annotated(self) -> tuple[str, str, Formula]:
        self.take("fof")
        self.take("(")
        name = _unquote(self.take())
        self.take(",")
        role = self.take()
        self.take(",")
        f = self.formula()
        depth = 0
        while not (depth == 0 and self.peek() == ")"):
            tok = self.take()
            depth += {"(": 1, ")": -1, "[": 1, "]": -1}.get(tok, 0)
        self.take(")")
        self.take(".")
        return name, role, f

    def formula(self) -> Formula:
        left = self.unitary()
        tok = self.peek()
        if tok in ("&", "|"):
            cls = And if tok == "&" else Or
            parts = [left]
            while self.peek() == tok:
                self.take()
                parts.append(self.unitary())
            out = parts[-1]
            for x in reversed(parts[:-1]):
                out = cls(x, out)
            return out
        if tok in ("=>", "<=", "<=>"):
            self.take()
            right = self.unitary()
            if tok == "=>":
                return Implies(left, right)
            if tok == "<=":
                return Implies(right, left)
            return Iff(left, right)
        return left

    def unitary(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula()
            self.take(")")
            return f
        if tok == "~":
            self.take()
            return Not(self.unitary())
        if tok in ("!", "?"):
            self.take()
            self.take("[")
            names = [self.take()]
            while self.peek() == ",":
                self.take()
                names.append(self.take())
            self.take("]")
            self.take(":")
            body = self.unitary()
            cls = Forall if tok == "!" else Exists
            for v in reversed(names):
                body = cls(v, body)
            return body
        if tok == "$true":
            self.take()
            return TOP
        if tok == "$false":
            self.take()
            return BOTTOM
        left = self.term()
        if self.peek() in ("=", "!="):
            op = self.take()
            right = self.term()
            return Eq(left, right) if op == "=" else Not(Eq(left, right))
        if isinstance(left, FVar):
            raise TptpSyntaxError(f"variable {left.name} used as a formula")
        return Atom(left.name, left.args)

    def term(self) -> FolTerm:
        tok = self.take()
        if tok[0].isupper():
            return FVar(tok)
        name = _unquote(tok)
        args = []
        if self.peek() == "(":
            self.take()
            args.append(self.term())
            while self.peek() == ",":
                self.take()
                args.append(self.term())
            self.take(")")
        return FFun(name, tuple(args))


def read_tptp(text: str) -> Problem:
    """Read TPTP FOF text of the shape written by :func:`to_tptp`.

    Symbol names are returned in their TPTP spelling.  The comment line
    preceding each formula restores ``source`` and ``kind`` when present.
    """
    statements: list[tuple[str, tuple[str, str] | None]] = []
    pending: tuple[str, str] | None = None
    buf = ""
    for line in text.splitlines():
        if not buf and line.lstrip().startswith("%"):
            m = re.match(r"%\s+(\S+)\s+(\S+)\s+(\S+)\s*$", line)
            if m:
                pending = (m.group(3), m.group(1))
            continue
        buf += line + "\n"
        if buf.rstrip().endswith(")."):
            statements.append((buf, pending))
            buf, pending = "", None
    if buf.strip():
        raise TptpSyntaxError("unterminated statement")
    roles = {v: k for k, v in TPTP_ROLE.items()}
    axioms = []
    conjecture = None
    for stmt, meta in statements:
        name, role, f = _TptpParser(_tptp_tokens(stmt)).annotated()
        source, kind = meta or ("-", "-")
        la = LabeledAxiom(name, roles.get(role, Role.AXIOM), f,
                          "" if source == "-" else source, "" if kind == "-" else kind)
        if role == "conjecture":
            if conjecture is not None:
                raise TptpSyntaxError("more than one conjecture")
            conjecture = la
        else:
            axioms.append(la)
    if conjecture is None:
        raise TptpSyntaxError("no conjecture")
    return Problem(tuple(axioms), conjecture)


# --------------------------------------------------------------------------
# Prover output


class Status(enum.Enum):
    THEOREM = "Theorem"
    COUNTER_SATISFIABLE = "CounterSatisfiable"
    TIMEOUT = "Timeout"
    GAVE_UP = "GaveUp"
    ERROR = "Error"


_SZS_MAP = {
    "Theorem": Status.THEOREM,
    "Unsatisfiable": Status.THEOREM,
    "ContradictoryAxioms": Status.THEOREM,
    "CounterSatisfiable": Status.COUNTER_SATISFIABLE,
    "Satisfiable": Status.COUNTER_SATISFIABLE,
    "Timeout": Status.TIMEOUT,
    "ResourceOut": Status.TIMEOUT,
    "MemoryOut": Status.GAVE_UP,
    "GaveUp": Status.GAVE_UP,
    "GiveUp": Status.GAVE_UP,
    "Unknown": Status.GAVE_UP,
    "Incomplete": Status.GAVE_UP,
    "Error": Status.ERROR,
    "InputError": Status.ERROR,
    "SyntaxError": Status.ERROR,
}


@dataclass(frozen=True)
class AtpResult:
    status: Status
    used_axioms: tuple[str, ...] = ()
    wall_time: float = 0.0
    raw: str = ""
    error: str = ""


_LABEL = r"('(?:\\.|[^'\\])*'|[A-Za-z0-9_]+)"
_CITATIONS = [
    re.compile(r"file\(\s*[^,()]+\s*,\s*" + _LABEL + r"\s*\)"),
    re.compile(r"^\s*fof\(\s*" + _LABEL + r"\s*,\s*(?:axiom|hypothesis|definition)\b", re.M),
    re.compile(r"\[input(?:\(axiom\))?\s+" + _LABEL + r"\]"),
    re.compile(r"\binput\(\s*" + _LABEL + r"\s*\)"),
]


def parse_szs(output: str, labels: Iterable[str] | None = None, wall_time: float = 0.0) -> AtpResult:
    """Status and cited axiom labels from prover output.

    With ``labels`` given, citations are restricted to those labels.
    Output without an SZS status line gives ``Error`` with the raw text.
    """
    m = None
    for m in re.finditer(r"SZS status\s+(\w+)", output):
        pass
    if m is None:
        return AtpResult(Status.ERROR, (), wall_time, output, "NoStatus")
    status = _SZS_MAP.get(m.group(1), Status.ERROR)
    if status is not Status.THEOREM:
        return AtpResult(status, (), wall_time, output)
    allowed = {_unquote(x) for x in labels} if labels is not None else None
    found: dict[str, None] = {}
    for pat in _CITATIONS:
        for cm in pat.finditer(output):
            name = _unquote(cm.group(1))
            if allowed is None or name in allowed:
                found.setdefault(name)
    return AtpResult(status, tuple(found), wall_time, output)
