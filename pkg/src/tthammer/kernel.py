"""Core calculus: terms, declarations, the s-expression export format,
substitution, weak-head reduction and approximate type inference.

Universe levels are collapsed to the three sorts Prop, Set and Type, and no
positivity, guard or universe checking is performed.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence, Union


class KernelError(Exception):
    pass


class ParseError(KernelError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class DuplicateName(KernelError):
    pass


class UnboundIdentifier(KernelError):
    pass


class Untypeable(KernelError):
    pass


class BudgetExceeded(KernelError):
    pass


class Sort(enum.Enum):
    PROP = "prop"
    SET = "set"
    TYPE = "type"


@dataclass(frozen=True)
class SortT:
    sort: Sort


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    name: str


@dataclass(frozen=True)
class App:
    fn: Term
    arg: Term


@dataclass(frozen=True)
class Lambda:
    binder: str
    binder_type: Term
    body: Term


@dataclass(frozen=True)
class Pi:
    binder: str
    binder_type: Term
    body: Term


@dataclass(frozen=True)
class Case:
    """``case`` on a value of inductive ``ind``.

    ``return_pred`` is a lambda telescope over the indices and the matched
    value; each branch is a lambda telescope over the non-parameter
    arguments of the corresponding constructor.
    """

    ind: str
    n_params: int
    scrutinee: Term
    return_pred: Term
    branches: tuple[Term, ...]


Term = Union[SortT, Var, Const, App, Lambda, Pi, Case]

PROP = SortT(Sort.PROP)
SET = SortT(Sort.SET)
TYPE = SortT(Sort.TYPE)


@dataclass(frozen=True)
class Definition:
    name: str
    body: Term
    type: Term


@dataclass(frozen=True)
class Typing:
    name: str
    type: Term


@dataclass(frozen=True)
class Inductive:
    name: str
    arity: Term
    n_params: int
    constructors: tuple[tuple[str, Term], ...]

    @property
    def constructor_names(self) -> tuple[str, ...]:
        return tuple(c for c, _ in self.constructors)


Declaration = Union[Definition, Typing, Inductive]

Context = tuple[tuple[str, Term], ...]


def declared_names(d: Declaration) -> tuple[str, ...]:
    if isinstance(d, Inductive):
        return (d.name,) + d.constructor_names
    return (d.name,)


class Environment:
    """Ordered global environment.

    Every name introduced by a declaration (including constructor names)
    maps back to its declaration.  Names in ``opaque`` are accepted as
    constants without a declaration and have no known type.
    """

    def __init__(self, decls: Iterable[Declaration] = (), opaque: Iterable[str] = ()):
        self.decls: list[Declaration] = []
        self._owner: dict[str, Declaration] = {}
        self._types: dict[str, Term] = {}
        self.opaque = frozenset(opaque)
        for d in decls:
            self.add(d)

    def add(self, d: Declaration) -> None:
        for n in declared_names(d):
            if n in self._owner:
                raise DuplicateName(n)
        self.decls.append(d)
        for n in declared_names(d):
            self._owner[n] = d
        if isinstance(d, Inductive):
            self._types[d.name] = d.arity
            for c, ty in d.constructors:
                self._types[c] = ty
        else:
            self._types[d.name] = d.type

    def extended(self, decls: Iterable[Declaration]) -> Environment:
        env = Environment(self.decls, self.opaque)
        for d in decls:
            env.add(d)
        return env

    def __contains__(self, name: str) -> bool:
        return name in self._owner

    def __iter__(self) -> Iterator[Declaration]:
        return iter(self.decls)

    def __len__(self) -> int:
        return len(self.decls)

    def names(self) -> list[str]:
        return list(self._owner)

    def owner(self, name: str) -> Declaration:
        return self._owner[name]

    def type_of(self, name: str) -> Term:
        try:
            return self._types[name]
        except KeyError:
            raise Untypeable(f"no type for constant {name}") from None

    def definition(self, name: str) -> Definition | None:
        d = self._owner.get(name)
        return d if isinstance(d, Definition) else None

    def inductive(self, name: str) -> Inductive | None:
        d = self._owner.get(name)
        return d if isinstance(d, Inductive) and d.name == name else None

    def constructor_inductive(self, name: str) -> Inductive | None:
        d = self._owner.get(name)
        if isinstance(d, Inductive) and name in d.constructor_names:
            return d
        return None


# --------------------------------------------------------------------------
# Free variables, fresh names, substitution


def free_vars(t: Term) -> list[str]:
    """Free variables in first-occurrence order."""
    out: dict[str, None] = {}
    _fv(t, frozenset(), out)
    return list(out)


def _fv(t: Term, bound: frozenset[str], out: dict[str, None]) -> None:
    if isinstance(t, Var):
        if t.name not in bound:
            out.setdefault(t.name)
    elif isinstance(t, App):
        _fv(t.fn, bound, out)
        _fv(t.arg, bound, out)
    elif isinstance(t, (Lambda, Pi)):
        _fv(t.binder_type, bound, out)
        _fv(t.body, bound | {t.binder}, out)
    elif isinstance(t, Case):
        _fv(t.scrutinee, bound, out)
        _fv(t.return_pred, bound, out)
        for b in t.branches:
            _fv(b, bound, out)


def constants(t: Term) -> list[str]:
    """Constant names in first-occurrence order."""
    out: dict[str, None] = {}
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Const):
            out.setdefault(u.name)
        elif isinstance(u, App):
            stack += [u.arg, u.fn]
        elif isinstance(u, (Lambda, Pi)):
            stack += [u.body, u.binder_type]
        elif isinstance(u, Case):
            out.setdefault(u.ind)
            stack += list(reversed(u.branches)) + [u.return_pred, u.scrutinee]
    return list(out)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    name = base
    while name in avoid:
        name += "'"
    return name


def subst(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding substitution of ``u`` for the free variable ``x``."""
    return _subst(t, x, u, frozenset(free_vars(u)))


def _subst(t: Term, x: str, u: Term, fvu: frozenset[str]) -> Term:
    if isinstance(t, Var):
        return u if t.name == x else t
    if isinstance(t, (SortT, Const)):
        return t
    if isinstance(t, App):
        return App(_subst(t.fn, x, u, fvu), _subst(t.arg, x, u, fvu))
    if isinstance(t, (Lambda, Pi)):
        ty = _subst(t.binder_type, x, u, fvu)
        if t.binder == x:
            return type(t)(t.binder, ty, t.body)
        body_fv = free_vars(t.body)
        if x not in body_fv:
            return type(t)(t.binder, ty, t.body)
        binder, body = t.binder, t.body
        if binder in fvu:
            binder = fresh_name(binder, fvu | set(body_fv) | {x})
            body = _subst(body, t.binder, Var(binder), frozenset({binder}))
        return type(t)(binder, ty, _subst(body, x, u, fvu))
    if isinstance(t, Case):
        return Case(
            t.ind,
            t.n_params,
            _subst(t.scrutinee, x, u, fvu),
            _subst(t.return_pred, x, u, fvu),
            tuple(_subst(b, x, u, fvu) for b in t.branches),
        )
    raise TypeError(t)


def rename_binder(t: Lambda | Pi, new: str) -> Lambda | Pi:
    if new == t.binder:
        return t
    return type(t)(new, t.binder_type, subst(t.body, t.binder, Var(new)))


def alpha_eq(a: Term, b: Term) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a: Term, b: Term, ma: dict[str, int], mb: dict[str, int], depth: int) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        ia, ib = ma.get(a.name), mb.get(b.name)
        if ia is None and ib is None:
            return a.name == b.name
        return ia == ib
    if isinstance(a, (SortT, Const)):
        return a == b
    if isinstance(a, App):
        return _alpha(a.fn, b.fn, ma, mb, depth) and _alpha(a.arg, b.arg, ma, mb, depth)
    if isinstance(a, (Lambda, Pi)):
        if not _alpha(a.binder_type, b.binder_type, ma, mb, depth):
            return False
        return _alpha(a.body, b.body, {**ma, a.binder: depth}, {**mb, b.binder: depth}, depth + 1)
    if isinstance(a, Case):
        return (
            a.ind == b.ind
            and a.n_params == b.n_params
            and len(a.branches) == len(b.branches)
            and _alpha(a.scrutinee, b.scrutinee, ma, mb, depth)
            and _alpha(a.return_pred, b.return_pred, ma, mb, depth)
            and all(_alpha(x, y, ma, mb, depth) for x, y in zip(a.branches, b.branches))
        )
    raise TypeError(a)


def decl_alpha_eq(a: Declaration, b: Declaration) -> bool:
    if type(a) is not type(b) or a.name != b.name:
        return False
    if isinstance(a, Definition):
        return alpha_eq(a.body, b.body) and alpha_eq(a.type, b.type)
    if isinstance(a, Typing):
        return alpha_eq(a.type, b.type)
    return (
        a.n_params == b.n_params
        and alpha_eq(a.arity, b.arity)
        and len(a.constructors) == len(b.constructors)
        and all(c == d and alpha_eq(s, t) for (c, s), (d, t) in zip(a.constructors, b.constructors))
    )


def spine(t: Term) -> tuple[Term, list[Term]]:
    args = []
    while isinstance(t, App):
        args.append(t.arg)
        t = t.fn
    args.reverse()
    return t, args


def apply(head: Term, args: Iterable[Term]) -> Term:
    for a in args:
        head = App(head, a)
    return head


def telescope(t: Term, kind: type = Pi) -> tuple[list[tuple[str, Term]], Term]:
    """Split leading binders of the given kind.  Binder names are kept."""
    binders = []
    while isinstance(t, kind):
        binders.append((t.binder, t.binder_type))
        t = t.body
    return binders, t


# --------------------------------------------------------------------------
# Reduction

DEFAULT_WHNF_BUDGET = 10_000


def whnf(env: Environment, t: Term, budget: int = DEFAULT_WHNF_BUDGET, delta: bool = True) -> Term:
    """Weak-head normal form under beta and (optionally) delta."""
    steps = 0
    while True:
        head, args = spine(t)
        if isinstance(head, Lambda) and args:
            t = apply(subst(head.body, head.binder, args[0]), args[1:])
        elif delta and isinstance(head, Const) and env.definition(head.name) is not None:
            t = apply(env.definition(head.name).body, args)
        else:
            return t
        steps += 1
        if steps > budget:
            raise BudgetExceeded(f"whnf exceeded {budget} steps")


def beta_normalize(t: Term, budget: int = DEFAULT_WHNF_BUDGET) -> Term:
    """Full beta normal form (no delta)."""
    counter = [0]

    def go(u: Term) -> Term:
        head, args = spine(u)
        while isinstance(head, Lambda) and args:
            counter[0] += 1
            if counter[0] > budget:
                raise BudgetExceeded(f"beta normalization exceeded {budget} steps")
            u = apply(subst(head.body, head.binder, args[0]), args[1:])
            head, args = spine(u)
        if isinstance(head, (Lambda, Pi)):
            head = type(head)(head.binder, go(head.binder_type), go(head.body))
        elif isinstance(head, Case):
            head = Case(head.ind, head.n_params, go(head.scrutinee), go(head.return_pred),
                        tuple(go(b) for b in head.branches))
        return apply(head, [go(a) for a in args])

    return go(t)


def unfold(t: Term, env: Environment, names: Iterable[str]) -> Term:
    """Replace every occurrence of the named definitions by their bodies."""
    names = {n for n in names if env.definition(n) is not None}
    if not names:
        return t

    def go(u: Term) -> Term:
        if isinstance(u, Const) and u.name in names:
            return env.definition(u.name).body
        if isinstance(u, App):
            return App(go(u.fn), go(u.arg))
        if isinstance(u, (Lambda, Pi)):
            return type(u)(u.binder, go(u.binder_type), go(u.body))
        if isinstance(u, Case):
            return Case(u.ind, u.n_params, go(u.scrutinee), go(u.return_pred),
                        tuple(go(b) for b in u.branches))
        return u

    return go(t)


# --------------------------------------------------------------------------
# Type inference


def _lookup(ctx: Context, x: str) -> Term:
    for name, ty in reversed(ctx):
        if name == x:
            return ty
    raise Untypeable(f"unbound variable {x}")


def extend(ctx: Context, binder: str, ty: Term, body: Term) -> tuple[Context, str, Term]:
    """Push ``binder : ty`` onto ``ctx``, renaming it if the name is taken."""
    names = {n for n, _ in ctx}
    if binder in names:
        new = fresh_name(binder, names | set(free_vars(body)))
        body = subst(body, binder, Var(new))
        binder = new
    return ctx + ((binder, ty),), binder, body


def infer_type(env: Environment, ctx: Context, t: Term, budget: int = DEFAULT_WHNF_BUDGET) -> Term:
    """Approximate CIC type inference.

    Argument types of applications are not checked against the domain.
    """
    if isinstance(t, SortT):
        return TYPE
    if isinstance(t, Var):
        return _lookup(ctx, t.name)
    if isinstance(t, Const):
        return env.type_of(t.name)
    if isinstance(t, App):
        fty = whnf(env, infer_type(env, ctx, t.fn, budget), budget)
        if not isinstance(fty, Pi):
            raise Untypeable("application of a non-function")
        return subst(fty.body, fty.binder, t.arg)
    if isinstance(t, Lambda):
        ctx2, x, body = extend(ctx, t.binder, t.binder_type, t.body)
        return Pi(x, t.binder_type, infer_type(env, ctx2, body, budget))
    if isinstance(t, Pi):
        s1 = _sort_of(env, ctx, t.binder_type, budget)
        ctx2, _, body = extend(ctx, t.binder, t.binder_type, t.body)
        s2 = _sort_of(env, ctx2, body, budget)
        if s2 is Sort.PROP:
            return PROP
        if Sort.TYPE in (s1, s2):
            return TYPE
        return SET
    if isinstance(t, Case):
        sty = whnf(env, infer_type(env, ctx, t.scrutinee, budget), budget)
        head, args = spine(sty)
        if not (isinstance(head, Const) and head.name == t.ind):
            raise Untypeable(f"case scrutinee is not of type {t.ind}")
        indices = args[t.n_params:]
        return beta_normalize(apply(t.return_pred, indices + [t.scrutinee]), budget)
    raise TypeError(t)


def _sort_of(env: Environment, ctx: Context, ty: Term, budget: int) -> Sort:
    s = whnf(env, infer_type(env, ctx, ty, budget), budget)
    if not isinstance(s, SortT):
        raise Untypeable("expected a type")
    return s.sort


def sort_of_type_of(env: Environment, ctx: Context, t: Term, budget: int = DEFAULT_WHNF_BUDGET) -> Sort | None:
    """Sort of the type of ``t``, or None when ``t`` is not a type.

    Untypeable terms and exhausted reduction budgets also give None.
    """
    try:
        s = whnf(env, infer_type(env, ctx, t, budget), budget)
    except (Untypeable, BudgetExceeded):
        return None
    return s.sort if isinstance(s, SortT) else None


def is_prop(env: Environment, ctx: Context, t: Term) -> bool:
    return sort_of_type_of(env, ctx, t) is Sort.PROP


def is_proof(env: Environment, ctx: Context, t: Term) -> bool:
    try:
        ty = infer_type(env, ctx, t)
    except (Untypeable, BudgetExceeded):
        return False
    return is_prop(env, ctx, ty)


def free_context(ctx: Context, t: Term) -> Context:
    """The sub-context of ``ctx`` that ``t`` depends on, in order."""
    if not ctx:
        return ()
    *rest, (x, ty) = ctx
    rest = tuple(rest)
    if x in free_vars(t):
        return free_context(rest, Lambda(x, ty, t)) + ((x, ty),)
    return free_context(rest, t)


# --------------------------------------------------------------------------
# Export format

_TOKEN = re.compile(r"\s+|;[^\n]*|\(|\)|[^\s();]+")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*\Z")
_NAT = re.compile(r"[0-9]+\Z")


@dataclass
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks = []
    line, col = 1, 1
    for m in _TOKEN.finditer(src):
        text = m.group()
        if not (text.isspace() or text.startswith(";")):
            toks.append(_Tok(text, line, col))
        nl = text.count("\n")
        if nl:
            line += nl
            col = len(text) - text.rfind("\n")
        else:
            col += len(text)
    return toks


def _read_sexprs(src: str) -> list:
    """Nested lists of tokens; each list is tagged with its opening token."""
    toks = _tokenize(src)
    stack: list[list] = [[]]
    opens: list[_Tok] = []
    for tok in toks:
        if tok.text == "(":
            stack.append([])
            opens.append(tok)
        elif tok.text == ")":
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", tok.line, tok.col)
            done = stack.pop()
            stack[-1].append(_SList(done, opens.pop()))
        else:
            stack[-1].append(tok)
    if len(stack) > 1:
        tok = opens[-1]
        raise ParseError("unclosed '('", tok.line, tok.col)
    return stack[0]


class _SList(list):
    def __init__(self, items, tok: _Tok):
        super().__init__(items)
        self.tok = tok


def _err(node, message: str) -> ParseError:
    tok = node.tok if isinstance(node, _SList) else node
    return ParseError(message, tok.line, tok.col)


def _atom(node, what: str, pattern=_IDENT) -> str:
    if not isinstance(node, _Tok) or not pattern.match(node.text):
        raise _err(node, f"expected {what}")
    return node.text


def _head(node) -> str:
    if not isinstance(node, _SList) or not node or not isinstance(node[0], _Tok):
        raise _err(node, "expected a parenthesized form")
    return node[0].text


def _parse_binder(node) -> tuple[str, object]:
    if not isinstance(node, _SList) or len(node) != 2:
        raise _err(node, "expected (NAME term)")
    return _atom(node[0], "binder name"), node[1]


class _TermParser:
    def __init__(self, known: set[str]):
        self.known = known

    def term(self, node, bound: tuple[str, ...]) -> Term:
        head = _head(node)
        args = node[1:]
        if head == "sort":
            if len(args) != 1 or not isinstance(args[0], _Tok) or args[0].text not in ("prop", "set", "type"):
                raise _err(node, "expected (sort prop|set|type)")
            return SortT(Sort(args[0].text))
        if head == "var":
            if len(args) != 1:
                raise _err(node, "expected (var NAME)")
            name = _atom(args[0], "variable name")
            if name not in bound:
                raise UnboundIdentifier(f"{node.tok.line}:{node.tok.col}: unbound variable {name}")
            return Var(name)
        if head == "const":
            if len(args) != 1:
                raise _err(node, "expected (const NAME)")
            name = _atom(args[0], "constant name")
            if name not in self.known:
                raise UnboundIdentifier(f"{node.tok.line}:{node.tok.col}: unbound constant {name}")
            return Const(name)
        if head == "app":
            if len(args) < 2:
                raise _err(node, "expected (app term term)")
            t = self.term(args[0], bound)
            for a in args[1:]:
                t = App(t, self.term(a, bound))
            return t
        if head in ("lambda", "pi"):
            if len(args) != 2:
                raise _err(node, f"expected ({head} (NAME term) term)")
            x, ty = _parse_binder(args[0])
            cls = Lambda if head == "lambda" else Pi
            return cls(x, self.term(ty, bound), self.term(args[1], bound + (x,)))
        if head == "case":
            if len(args) != 5 or not isinstance(args[4], _SList):
                raise _err(node, "expected (case NAME NAT term term (term ...))")
            ind = _atom(args[0], "inductive name")
            if ind not in self.known:
                raise UnboundIdentifier(f"{node.tok.line}:{node.tok.col}: unbound inductive {ind}")
            n = int(_atom(args[1], "parameter count", _NAT))
            return Case(ind, n, self.term(args[2], bound), self.term(args[3], bound),
                        tuple(self.term(b, bound) for b in args[4]))
        raise _err(node, f"unknown term form {head!r}")


def parse_decls(source: str, known: Iterable[str] = ()) -> list[Declaration]:
    """Parse the export format.

    ``known`` lists constant names declared elsewhere (e.g. in a prelude
    file) that the source may refer to.
    """
    known = set(known)
    parser = _TermParser(known)
    out: list[Declaration] = []
    seen: set[str] = set()

    def introduce(name: str, node) -> None:
        if name in seen or name in known:
            raise DuplicateName(f"{node.tok.line}:{node.tok.col}: duplicate name {name}")
        seen.add(name)
        known.add(name)

    for node in _read_sexprs(source):
        head = _head(node)
        args = node[1:]
        if head == "definition":
            if len(args) != 3:
                raise _err(node, "expected (definition NAME term term)")
            name = _atom(args[0], "declaration name")
            body = parser.term(args[1], ())
            ty = parser.term(args[2], ())
            introduce(name, node)
            out.append(Definition(name, body, ty))
        elif head == "typing":
            if len(args) != 2:
                raise _err(node, "expected (typing NAME term)")
            name = _atom(args[0], "declaration name")
            ty = parser.term(args[1], ())
            introduce(name, node)
            out.append(Typing(name, ty))
        elif head == "inductive":
            if len(args) != 4 or not isinstance(args[3], _SList):
                raise _err(node, "expected (inductive NAME term NAT ((NAME term) ...))")
            name = _atom(args[0], "inductive name")
            arity = parser.term(args[1], ())
            n = int(_atom(args[2], "parameter count", _NAT))
            introduce(name, node)
            ctors = []
            for c in args[3]:
                cname, cty = _parse_binder(c)
                ctors.append((cname, parser.term(cty, ())))
            for (cname, _), c in zip(ctors, args[3]):
                if cname == name:
                    raise DuplicateName(f"{c.tok.line}:{c.tok.col}: constructor {cname} reuses the inductive name")
                introduce(cname, c)
            out.append(Inductive(name, arity, n, tuple(ctors)))
        else:
            raise _err(node, f"unknown declaration form {head!r}")
    return out


def print_term(t: Term) -> str:
    if isinstance(t, SortT):
        return f"(sort {t.sort.value})"
    if isinstance(t, Var):
        return f"(var {t.name})"
    if isinstance(t, Const):
        return f"(const {t.name})"
    if isinstance(t, App):
        return f"(app {print_term(t.fn)} {print_term(t.arg)})"
    if isinstance(t, Lambda):
        return f"(lambda ({t.binder} {print_term(t.binder_type)}) {print_term(t.body)})"
    if isinstance(t, Pi):
        return f"(pi ({t.binder} {print_term(t.binder_type)}) {print_term(t.body)})"
    if isinstance(t, Case):
        branches = " ".join(print_term(b) for b in t.branches)
        return (f"(case {t.ind} {t.n_params} {print_term(t.scrutinee)} "
                f"{print_term(t.return_pred)} ({branches}))")
    raise TypeError(t)


def print_decl(d: Declaration) -> str:
    if isinstance(d, Definition):
        return f"(definition {d.name} {print_term(d.body)} {print_term(d.type)})"
    if isinstance(d, Typing):
        return f"(typing {d.name} {print_term(d.type)})"
    ctors = " ".join(f"({c} {print_term(ty)})" for c, ty in d.constructors)
    return f"(inductive {d.name} {print_term(d.arity)} {d.n_params} ({ctors}))"


def print_decls(decls: Sequence[Declaration]) -> str:
    return "".join(print_decl(d) + "\n" for d in decls)


def load_environment(*sources: str) -> Environment:
    """Parse several export texts in order into one environment."""
    env = Environment()
    for src in sources:
        for d in parse_decls(src, env.names()):
            env.add(d)
    return env
