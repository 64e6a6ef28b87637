"""Simply-typed HOL with products: types, terms, substitution, beta, and the sequent checker.

Terms are kept as written.  Equality up to alpha goes through :func:`canon`,
which renames every lambda binder to ``_0, _1, ...`` in pre-order.  PNL atoms
are literally HOL variables of type ``mu_nu`` (``Var("nu#0", mu_nu, True)``).

Text syntax::

    types   o   mu_nu   (mu_nu, mu_iota)   mu_nu -> mu_iota   (right associative)
    terms   \\X:ty. t    t u    (t1, t2)    bot    imp    forall[ty]    nu#0
    sugar   a => b   for   imp a b
            forall X:ty. t   for   forall[ty] (\\X:ty. t)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count
from typing import Iterable, Iterator, Union

from . import sexpr
from .atoms import Atom
from .sexpr import Sym, split_node
from .text import ParseError, TokenStream, logical_lines


class HolTypeError(TypeError):
    pass


class HolDerivationError(ValueError):
    pass


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class HBase:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class HTuple:
    items: tuple = ()

    def __str__(self) -> str:
        if len(self.items) == 1:
            return f"({self.items[0]},)"
        return "(" + ", ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class HArrow:
    dom: "HType"
    cod: "HType"

    def __str__(self) -> str:
        d = f"({self.dom})" if isinstance(self.dom, HArrow) else str(self.dom)
        return f"{d} -> {self.cod}"


HType = Union[HBase, HTuple, HArrow]
O = HBase("o")


def arrows(*tys: HType) -> HType:
    out = tys[-1]
    for t in reversed(tys[:-1]):
        out = HArrow(t, out)
    return out


def mu(sort: str) -> HBase:
    return HBase(f"mu_{sort}")


# ---------------------------------------------------------------------------
# terms


@dataclass(frozen=True)
class Var:
    name: str
    type: HType
    is_atom: bool = False

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Lam:
    var: Var
    body: "HTerm"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class HApp:
    fn: "HTerm"
    arg: "HTerm"

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class HTup:
    items: tuple = ()

    def __str__(self) -> str:
        return show(self)


@dataclass(frozen=True)
class Const:
    name: str
    type: HType

    def __str__(self) -> str:
        return show(self)


HTerm = Union[Var, Lam, HApp, HTup, Const]

BOT = Const("bot", O)
IMP = Const("imp", arrows(O, O, O))


def forall_const(beta: HType) -> Const:
    return Const("forall", HArrow(HArrow(beta, O), O))


def atom_var(a: Atom) -> Var:
    return Var(str(a), mu(a.sort), True)


def var_atom(v: Var) -> Atom:
    if not v.is_atom:
        raise ValueError(f"{v.name} is not an atom")
    sort, _, idx = v.name.partition("#")
    return Atom(sort, int(idx))


def app(f: HTerm, *args: HTerm) -> HTerm:
    for a in args:
        f = HApp(f, a)
    return f


def mk_imp(a: HTerm, b: HTerm) -> HTerm:
    return HApp(HApp(IMP, a), b)


def mk_forall(x: Var, body: HTerm) -> HTerm:
    return HApp(forall_const(x.type), Lam(x, body))


def lams(vs: Iterable[Var], body: HTerm) -> HTerm:
    for v in reversed(list(vs)):
        body = Lam(v, body)
    return body


def as_imp(t: HTerm):
    """``(a, b)`` when ``t`` is literally ``imp a b``."""
    if isinstance(t, HApp) and isinstance(t.fn, HApp) and t.fn.fn == IMP:
        return t.fn.arg, t.arg
    return None


def as_forall(t: HTerm):
    """``(X, body)`` when ``t`` is literally ``forall[b] (\\X. body)``."""
    if (isinstance(t, HApp) and isinstance(t.fn, Const) and t.fn.name == "forall"
            and isinstance(t.arg, Lam)):
        return t.arg.var, t.arg.body
    return None


# ---------------------------------------------------------------------------
# signatures and typing


@dataclass
class HolSignature:
    base_types: frozenset = frozenset({"o"})
    consts: dict = field(default_factory=dict)
    vars: dict = field(default_factory=dict)
    axioms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.base_types = frozenset(self.base_types) | {"o"}

    def check_type(self, ty: HType) -> HType:
        match ty:
            case HBase(n):
                if n not in self.base_types:
                    raise HolTypeError(f"undeclared base type {n}")
            case HTuple(items):
                for i in items:
                    self.check_type(i)
            case HArrow(d, c):
                self.check_type(d)
                self.check_type(c)
            case _:
                raise HolTypeError(f"not a type: {ty!r}")
        return ty


def _is_forall_type(ty: HType) -> bool:
    return (isinstance(ty, HArrow) and ty.cod == O and isinstance(ty.dom, HArrow)
            and ty.dom.cod == O)


def type_of(t: HTerm, sig: HolSignature | None = None) -> HType:
    """The unique type of ``t``; constants are checked against ``sig`` when given."""
    match t:
        case Var(_, ty, _):
            return ty
        case Const(name, ty):
            if name == "bot":
                if ty != O:
                    raise HolTypeError("bot must have type o")
            elif name == "imp":
                if ty != IMP.type:
                    raise HolTypeError("imp must have type o -> o -> o")
            elif name == "forall":
                if not _is_forall_type(ty):
                    raise HolTypeError(f"forall cannot have type {ty}")
            elif sig is not None:
                if name not in sig.consts:
                    raise HolTypeError(f"undeclared constant {name}")
                if sig.consts[name] != ty:
                    raise HolTypeError(f"constant {name} has type {sig.consts[name]}, not {ty}")
            return ty
        case Lam(v, body):
            return HArrow(v.type, type_of(body, sig))
        case HApp(f, a):
            ft = type_of(f, sig)
            at = type_of(a, sig)
            if not isinstance(ft, HArrow):
                raise HolTypeError(f"cannot apply {show(f)} of non-function type {ft}")
            if ft.dom != at:
                raise HolTypeError(f"{show(f)} expects {ft.dom}, got {show(a)} of type {at}")
            return ft.cod
        case HTup(items):
            return HTuple(tuple(type_of(i, sig) for i in items))
    raise HolTypeError(f"not a HOL term: {t!r}")


# ---------------------------------------------------------------------------
# variables, alpha, substitution, beta


@lru_cache(maxsize=1 << 16)
def fv(t: HTerm) -> frozenset:
    match t:
        case Var():
            return frozenset({t})
        case Const():
            return frozenset()
        case Lam(v, body):
            return fv(body) - {v}
        case HApp(f, a):
            return fv(f) | fv(a)
        case HTup(items):
            return frozenset().union(*(fv(i) for i in items))
    raise HolTypeError(f"not a HOL term: {t!r}")


def fv_of(ts: Iterable[HTerm]) -> frozenset:
    return frozenset().union(*(fv(t) for t in ts))


@lru_cache(maxsize=1 << 16)
def canon(t: HTerm) -> HTerm:
    """Alpha-canonical form: binders renamed ``_k`` in pre-order, avoiding free names."""
    taken = {v.name for v in fv(t)}
    names = (f"_{k}" for k in count() if f"_{k}" not in taken)
    return _canon(t, {}, names)


def _canon(t: HTerm, env: dict, names) -> HTerm:
    match t:
        case Var():
            return env.get(t, t)
        case Const():
            return t
        case Lam(v, body):
            w = Var(next(names), v.type)
            return Lam(w, _canon(body, {**env, v: w}, names))
        case HApp(f, a):
            return HApp(_canon(f, env, names), _canon(a, env, names))
        case HTup(items):
            return HTup(tuple(_canon(i, env, names) for i in items))
    raise HolTypeError(f"not a HOL term: {t!r}")


def alpha_eq(t: HTerm, u: HTerm) -> bool:
    return canon(t) == canon(u)


def fresh_var(v: Var, avoid: Iterable[Var]) -> Var:
    names = {w.name for w in avoid}
    if v.is_atom:
        a = var_atom(v)
        for i in count(0):
            w = Var(f"{a.sort}#{i}", v.type, True)
            if w.name not in names:
                return w
    for k in count(1):
        w = Var(v.name + "'" * k, v.type)
        if w.name not in names:
            return w
    raise AssertionError("unreachable")


def subst(t: HTerm, X: Var, u: HTerm) -> HTerm:
    """Capture-avoiding ``t[X:=u]``."""
    fvu = fv(u)

    def go(t):
        match t:
            case Var():
                return u if t == X else t
            case Const():
                return t
            case HApp(f, a):
                return HApp(go(f), go(a))
            case HTup(items):
                return HTup(tuple(go(i) for i in items))
            case Lam(Y, b):
                if Y == X or X not in fv(b):
                    return t
                if Y in fvu:
                    Z = fresh_var(Y, fv(b) | fvu | {X})
                    b = subst(b, Y, Z)
                    Y = Z
                return Lam(Y, go(b))
        raise HolTypeError(f"not a HOL term: {t!r}")

    return go(t)


def beta_nf(t: HTerm) -> HTerm:
    """Normal-order beta normal form."""
    match t:
        case Var() | Const():
            return t
        case Lam(v, b):
            return Lam(v, beta_nf(b))
        case HTup(items):
            return HTup(tuple(beta_nf(i) for i in items))
        case HApp(f, a):
            f = beta_nf(f)
            if isinstance(f, Lam):
                return beta_nf(subst(f.body, f.var, a))
            return HApp(f, beta_nf(a))
    raise HolTypeError(f"not a HOL term: {t!r}")


def beta_nf_innermost(t: HTerm) -> HTerm:
    """Beta normal form reducing arguments before contracting."""
    match t:
        case Var() | Const():
            return t
        case Lam(v, b):
            return Lam(v, beta_nf_innermost(b))
        case HTup(items):
            return HTup(tuple(beta_nf_innermost(i) for i in items))
        case HApp(f, a):
            f, a = beta_nf_innermost(f), beta_nf_innermost(a)
            if isinstance(f, Lam):
                return beta_nf_innermost(subst(f.body, f.var, a))
            return HApp(f, a)
    raise HolTypeError(f"not a HOL term: {t!r}")


def is_beta_normal(t: HTerm) -> bool:
    match t:
        case Var() | Const():
            return True
        case Lam(_, b):
            return is_beta_normal(b)
        case HTup(items):
            return all(is_beta_normal(i) for i in items)
        case HApp(f, a):
            return not isinstance(f, Lam) and is_beta_normal(f) and is_beta_normal(a)
    return False


@lru_cache(maxsize=1 << 16)
def beta_key(t: HTerm) -> HTerm:
    return canon(beta_nf(t))


def beta_eq(t: HTerm, u: HTerm) -> bool:
    return beta_key(t) == beta_key(u)


def rename_vars(mapping: dict, t: HTerm) -> HTerm:
    """Apply a bijection on variables everywhere, binders included."""
    match t:
        case Var():
            return mapping.get(t, t)
        case Const():
            return t
        case Lam(v, b):
            return Lam(mapping.get(v, v), rename_vars(mapping, b))
        case HApp(f, a):
            return HApp(rename_vars(mapping, f), rename_vars(mapping, a))
        case HTup(items):
            return HTup(tuple(rename_vars(mapping, i) for i in items))
    raise HolTypeError(f"not a HOL term: {t!r}")


def permute_atoms(pi, t: HTerm) -> HTerm:
    """``pi . t`` reading an atom permutation as a permutation of HOL variables."""
    mapping = {atom_var(a): atom_var(pi(a)) for a in pi.nontriv()}
    return rename_vars(mapping, t)


def size(t: HTerm) -> int:
    match t:
        case Var() | Const():
            return 1
        case Lam(_, b):
            return 1 + size(b)
        case HApp(f, a):
            return 1 + size(f) + size(a)
        case HTup(items):
            return 1 + sum(size(i) for i in items)
    return 1


# ---------------------------------------------------------------------------
# printing


def show(t: HTerm) -> str:
    imp = as_imp(t)
    if imp is not None:
        a, b = imp
        return f"{_paren_imp_left(a)} => {show(b)}"
    q = as_forall(t)
    if q is not None:
        x, body = q
        return f"forall {_binder(x)}. {show(body)}"
    match t:
        case Var(name):
            return name
        case Const(name, ty):
            return f"forall[{ty.dom.dom}]" if name == "forall" else name
        case Lam(v, b):
            return f"\\{_binder(v)}. {show(b)}"
        case HApp(f, a):
            return f"{_fn(f)} {_arg(a)}"
        case HTup(items):
            if len(items) == 1:
                return f"({show(items[0])},)"
            return "(" + ", ".join(show(i) for i in items) + ")"
    raise HolTypeError(f"not a HOL term: {t!r}")


def _binder(v: Var) -> str:
    return v.name if v.is_atom else f"{v.name}:{v.type}"


def _is_sugared(t: HTerm) -> bool:
    return as_imp(t) is not None or as_forall(t) is not None


def _paren_imp_left(a: HTerm) -> str:
    s = show(a)
    return f"({s})" if _is_sugared(a) or isinstance(a, Lam) else s


def _fn(f: HTerm) -> str:
    s = show(f)
    return f"({s})" if isinstance(f, Lam) or _is_sugared(f) else s


def _arg(a: HTerm) -> str:
    s = show(a)
    return f"({s})" if isinstance(a, (Lam, HApp)) else s


# ---------------------------------------------------------------------------
# parsing


class HolParser(TokenStream):
    def __init__(self, text: str, sig: HolSignature, env: dict | None = None):
        super().__init__(text)
        self.sig = sig
        self.env = dict(env or {})

    def type(self) -> HType:
        left = self.atype()
        if self.accept("->"):
            return HArrow(left, self.type())
        return left

    def atype(self) -> HType:
        if self.accept("("):
            if self.accept(")"):
                return HTuple(())
            first = self.type()
            if self.accept(")"):
                return first
            items = [first]
            while self.accept(","):
                if self.at(")"):
                    break
                items.append(self.type())
            self.expect(")")
            return HTuple(tuple(items))
        t = self.expect_kind("name")
        if t.value not in self.sig.base_types:
            raise ParseError(f"undeclared base type {t.value}", self.text, t.pos)
        return HBase(t.value)

    def binder(self) -> Var:
        if self.peek().kind == "atom":
            a = self.atom()
            v = atom_var(a)
            if self.accept(":"):
                ty = self.type()
                if ty != v.type:
                    self.fail(f"atom {a} has type {v.type}")
            return v
        name = self.expect_kind("name").value
        self.expect(":")
        return Var(name, self.type())

    def bound(self, v: Var, body_fn):
        saved = self.env
        self.env = {**saved, v.name: v}
        try:
            return body_fn()
        finally:
            self.env = saved

    def term(self) -> HTerm:
        if self.accept("\\"):
            v = self.binder()
            self.expect(".")
            return Lam(v, self.bound(v, self.term))
        if self.at("forall") and not self.at("[", 1):
            self.next()
            v = self.binder()
            self.expect(".")
            return mk_forall(v, self.bound(v, self.term))
        left = self.appterm()
        if self.accept("=>"):
            return mk_imp(left, self.term())
        return left

    def appterm(self) -> HTerm:
        t = self.aterm()
        while self._starts_aterm():
            t = HApp(t, self.aterm())
        return t

    def _starts_aterm(self) -> bool:
        t = self.peek()
        if t.kind == "atom":
            return True
        if t.kind == "name":
            return not (t.value == "forall" and not self.at("[", 1))
        return t.kind == "op" and t.value == "("

    def aterm(self) -> HTerm:
        t = self.peek()
        if t.kind == "atom":
            return atom_var(self.atom())
        if self.accept("("):
            if self.accept(")"):
                return HTup(())
            first = self.term()
            if self.accept(")"):
                return first
            items = [first]
            while self.accept(","):
                if self.at(")"):
                    break
                items.append(self.term())
            self.expect(")")
            return HTup(tuple(items))
        tok = self.expect_kind("name")
        name = tok.value
        if name == "forall":
            self.expect("[")
            beta = self.type()
            self.expect("]")
            return forall_const(beta)
        if name in self.env:
            return self.env[name]
        if name in self.sig.vars:
            return self.sig.vars[name]
        if name in self.sig.consts:
            return Const(name, self.sig.consts[name])
        if name == "bot":
            return BOT
        if name == "imp":
            return IMP
        raise ParseError(f"undeclared HOL identifier {name}", self.text, tok.pos)


def parse_type(text: str, sig: HolSignature) -> HType:
    p = HolParser(text, sig)
    ty = p.type()
    p.done()
    return ty


def parse_hol(text: str, sig: HolSignature, env: dict | None = None) -> HTerm:
    p = HolParser(text, sig, env)
    t = p.term()
    p.done()
    try:
        type_of(t, sig)
    except HolTypeError as e:
        raise ParseError(str(e), text) from e
    return t


def parse_hol_signature(text: str) -> HolSignature:
    sig = HolSignature()
    for line in logical_lines(text):
        kw, _, rest = line.partition(" ")
        if kw == "basetype":
            sig.base_types = sig.base_types | {rest.strip()}
            continue
        name, sep, body = rest.partition(":")
        name = name.strip()
        if kw not in ("const", "var", "axiom") or not sep or not name:
            raise ParseError(f"bad HOL signature line {line!r}")
        if kw == "axiom":
            t = parse_hol(body, sig)
            if type_of(t, sig) != O:
                raise ParseError(f"axiom {name} is not a proposition")
            sig.axioms[name] = t
            continue
        ty = parse_type(body, sig)
        if kw == "const":
            sig.consts[name] = ty
        else:
            sig.vars[name] = Var(name, ty)
    return sig


def show_hol_signature(sig: HolSignature) -> str:
    lines = [f"basetype {b}" for b in sorted(sig.base_types - {"o"})]
    lines += [f"const {c} : {ty}" for c, ty in sorted(sig.consts.items())]
    lines += [f"var {v} : {x.type}" for v, x in sorted(sig.vars.items())]
    lines += [f"axiom {n} : {show(t)}" for n, t in sorted(sig.axioms.items())]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# sequents, derivations, checking


@dataclass(frozen=True)
class HolSequent:
    """Formulas are kept as written; the checker compares them up to alpha (and beta)."""

    left: tuple
    right: tuple

    @staticmethod
    def of(left: Iterable[HTerm] = (), right: Iterable[HTerm] = ()) -> "HolSequent":
        return HolSequent(_dedup(left), _dedup(right))

    def props(self) -> tuple:
        return self.left + self.right

    def __str__(self) -> str:
        return f"{', '.join(map(show, self.left))} |- {', '.join(map(show, self.right))}".strip()


def _dedup(ts: Iterable[HTerm]) -> tuple:
    seen, out = set(), []
    for t in ts:
        k = canon(t)
        if k not in seen:
            seen.add(k)
            out.append(t)
    return tuple(out)


@dataclass(frozen=True)
class HAx:
    pass


@dataclass(frozen=True)
class HBotL:
    pass


@dataclass(frozen=True)
class HImpL:
    pass


@dataclass(frozen=True)
class HImpR:
    pass


@dataclass(frozen=True)
class HForallL:
    var: Var
    witness: HTerm


@dataclass(frozen=True)
class HForallR:
    var: Var


HRule = HAx | HBotL | HImpL | HImpR | HForallL | HForallR
HARITY = {HAx: 0, HBotL: 0, HImpL: 2, HImpR: 1, HForallL: 1, HForallR: 1}


@dataclass(frozen=True)
class HolDerivation:
    conclusion: HolSequent
    rule: HRule
    premises: tuple = ()

    def nodes(self, path: str = "0") -> Iterator[tuple]:
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(f"{path}.{i}")


def check_hol(d: HolDerivation, modulo_beta: bool = False, sig: HolSignature | None = None):
    """Check every node; with ``modulo_beta`` formulas are compared in beta normal form."""
    from .proof import CheckReport, NodeReport

    key = beta_key if modulo_beta else canon
    nodes = []
    for path, node in d.nodes():
        msg = _check_hnode(node, key, sig)
        nodes.append(NodeReport(path, type(node.rule).__name__, not msg, msg))
    return CheckReport(all(n.ok for n in nodes), nodes)


def _keys(ts, key) -> frozenset:
    return frozenset(key(t) for t in ts)


def _check_hnode(node: HolDerivation, key, sig) -> str:
    seq, rule, prem = node.conclusion, node.rule, node.premises
    for t in seq.props():
        try:
            ty = type_of(t, sig)
        except HolTypeError as e:
            return f"ill-typed formula {show(t)}: {e}"
        if ty != O:
            return f"formula {show(t)} has type {ty}, not o"
    if type(rule) not in HARITY:
        return f"unknown rule {rule!r}"
    if len(prem) != HARITY[type(rule)]:
        return f"{type(rule).__name__} needs {HARITY[type(rule)]} premise(s), got {len(prem)}"
    L, R = _keys(seq.left, key), _keys(seq.right, key)
    pk = [(_keys(p.conclusion.left, key), _keys(p.conclusion.right, key)) for p in prem]
    match rule:
        case HAx():
            return "" if L & R else "no formula appears on both sides"
        case HBotL():
            return "" if key(BOT) in L else "bot is not on the left"
        case HImpL():
            for p in L:
                ab = as_imp(p)
                if ab is None:
                    continue
                a, b = key(ab[0]), key(ab[1])
                for phi in (L - {p}, L):
                    if pk[0] == (phi, R | {a}) and pk[1] == (phi | {b}, R):
                        return ""
            return "premises do not match hImpL for any left implication"
        case HImpR():
            for p in R:
                ab = as_imp(p)
                if ab is None:
                    continue
                a, b = key(ab[0]), key(ab[1])
                for psi in (R - {p}, R):
                    if pk[0] == (L | {a}, psi | {b}):
                        return ""
            return "premise does not match hImpR for any right implication"
        case HForallL(_, t):
            try:
                tt = type_of(t, sig)
            except HolTypeError as e:
                return f"ill-typed witness {show(t)}: {e}"
            cands = [p for p in L if as_forall(p) is not None]
            if not cands:
                return "no universal on the left"
            typed = [p for p in cands if as_forall(p)[0].type == tt]
            if not typed:
                return f"witness {show(t)} has type {tt}, matching no left universal"
            for p in typed:
                x, body = as_forall(p)
                inst = key(subst(body, x, t))
                for phi in (L - {p}, L):
                    if pk[0] == (phi | {inst}, R):
                        return ""
            return f"premise is not an instance at witness {show(t)} of any left universal"
        case HForallR(X):
            cands = [p for p in R if as_forall(p) is not None and as_forall(p)[0].type == X.type]
            if not cands:
                return f"no universal over {X.type} on the right"
            reasons = set()
            for p in cands:
                y, body = as_forall(p)
                inst = key(subst(body, y, X))
                for psi in (R - {p}, R):
                    if X in fv_of(L | psi):
                        reasons.add(f"eigenvariable {X.name} is free in the context")
                        continue
                    if pk[0] == (L, psi | {inst}):
                        return ""
                    reasons.add("premise does not match")
            return "; ".join(sorted(reasons))
    return f"unknown rule {rule!r}"


# ---------------------------------------------------------------------------
# derivation files (h-prefixed tags)


def parse_hol_sequent(sig: HolSignature, node, env: dict | None = None) -> HolSequent:
    tag, _, sides = split_node(node)
    if tag != "sequent":
        raise HolDerivationError(f"expected (sequent ...), got ({tag} ...)")
    out = {"left": [], "right": []}
    for side in sides:
        stag, _, items = split_node(side)
        if stag not in out:
            raise HolDerivationError(f"expected (left ...) or (right ...), got ({stag} ...)")
        out[stag] += [_hprop_item(sig, i, env) for i in items]
    return HolSequent.of(out["left"], out["right"])


def _hprop_item(sig: HolSignature, item, env: dict | None = None) -> HTerm:
    if isinstance(item, list):
        tag, _, args = split_node(item)
        if tag != "axiom" or len(args) != 1:
            raise HolDerivationError("expected a term string or (axiom NAME)")
        name = str(args[0])
        if name not in sig.axioms:
            raise HolDerivationError(f"no axiom named {name}")
        return sig.axioms[name]
    return parse_hol(item, sig, env)


def load_hol_derivation(sig: HolSignature, text: str) -> HolDerivation:
    try:
        tree = sexpr.loads(text)
        tag, _, parts = split_node(tree)
        if tag != "derivation" or len(parts) != 2:
            raise HolDerivationError("expected (derivation (sequent ...) NODE)")
        return _helab(sig, parse_hol_sequent(sig, parts[0]), parts[1], {})
    except (ParseError, sexpr.SexprError) as e:
        raise HolDerivationError(str(e)) from e


def _hprincipal(sig, kw, ctx, test, what, seq, env):
    if "on" in kw:
        p = parse_hol(kw["on"], sig, env)
        for q in ctx:
            if canon(q) == canon(p):
                return q
        raise HolDerivationError(f"{show(p)} is not in the context of {seq}")
    cands = [q for q in ctx if test(q) is not None]
    if len(cands) != 1:
        raise HolDerivationError(f"{'no' if not cands else 'several'} {what} in {seq}")
    return cands[0]


def _helab(sig: HolSignature, seq: HolSequent, node, env: dict) -> HolDerivation:
    tag, kw, kids = split_node(node)
    if "seq" in kw:
        seq = parse_hol_sequent(sig, kw["seq"], env)
    L, R = seq.left, seq.right
    env = {**env, **{v.name: v for v in fv_of(seq.props()) if not v.is_atom}}

    def sub(i, s):
        if i >= len(kids):
            raise HolDerivationError(f"{tag} is missing premise {i + 1}")
        return _helab(sig, s, kids[i], env)

    if tag == "hax":
        return HolDerivation(seq, HAx())
    if tag == "hbotL":
        return HolDerivation(seq, HBotL())
    if tag == "himpL":
        a, b = as_imp(_hprincipal(sig, kw, L, as_imp, "left implication", seq, env))
        return HolDerivation(seq, HImpL(), (sub(0, HolSequent.of(L, R + (a,))),
                                            sub(1, HolSequent.of(L + (b,), R))))
    if tag == "himpR":
        a, b = as_imp(_hprincipal(sig, kw, R, as_imp, "right implication", seq, env))
        return HolDerivation(seq, HImpR(), (sub(0, HolSequent.of(L + (a,), R + (b,))),))
    if tag == "hforallL":
        if "witness" not in kw:
            raise HolDerivationError("hforallL needs :witness")
        x, body = as_forall(_hprincipal(sig, kw, L, as_forall, "left universal", seq, env))
        t = parse_hol(kw["witness"], sig, env)
        return HolDerivation(seq, HForallL(x, t), (sub(0, HolSequent.of(L + (subst(body, x, t),), R)),))
    if tag == "hforallR":
        if "X" not in kw:
            raise HolDerivationError("hforallR needs :X naming the eigenvariable")
        y, body = as_forall(_hprincipal(sig, kw, R, as_forall, "right universal", seq, env))
        X = Var(str(kw["X"]), y.type)
        env = {**env, X.name: X}
        return HolDerivation(seq, HForallR(X), (sub(0, HolSequent.of(L, R + (subst(body, y, X),))),))
    raise HolDerivationError(f"unknown HOL rule tag {tag}")


_HTAGS = {HAx: "hax", HBotL: "hbotL", HImpL: "himpL", HImpR: "himpR",
          HForallL: "hforallL", HForallR: "hforallR"}


def hol_sequent_sexpr(seq: HolSequent) -> list:
    return [Sym("sequent"), [Sym("left"), *map(show, seq.left)], [Sym("right"), *map(show, seq.right)]]


def hol_node_sexpr(d: HolDerivation) -> list:
    out = [Sym(_HTAGS[type(d.rule)]), Sym(":seq"), hol_sequent_sexpr(d.conclusion)]
    match d.rule:
        case HForallL(x, t):
            out += [Sym(":on"), show(_principal_for(d, x)), Sym(":witness"), show(t)]
        case HForallR(X):
            out += [Sym(":X"), Sym(X.name)]
    return out + [hol_node_sexpr(p) for p in d.premises]


def _principal_for(d: HolDerivation, x: Var) -> HTerm:
    for p in d.conclusion.left:
        q = as_forall(p)
        if q is not None and q[0] == x:
            return p
    for p in d.conclusion.left:
        q = as_forall(beta_nf(p))
        if q is not None and q[0].type == x.type:
            return p
    raise HolDerivationError(f"no universal binding {x.name} on the left")


def dump_hol_derivation(d: HolDerivation) -> str:
    return sexpr.dumps([Sym("derivation"), hol_sequent_sexpr(d.conclusion), hol_node_sexpr(d)]) + "\n"
