"""Desk-scale nominal semantics.

Ground values form a Herbrand permutation set: atoms, tuples, abstractions and
free constructor applications.  ``Ren(-)`` is represented by
:class:`RenElement` kept in a canonical form, so its equivalence is structural.
On top of these sit the PNL denotation of terms and propositions and the
denotation of the translated HOL fragment, which together give the commuting
square checked by ``square_check``.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count
from typing import Callable, Iterable, Mapping, Sequence, Union

from .atoms import ID_REN, Atom, Permutation, Renaming, fresh_atom
from .hol import (
    BOT as HBOT,
    IMP as HIMP,
    Const,
    HApp,
    HArrow,
    HBase,
    HTerm,
    HTup,
    HTuple,
    HType,
    Lam,
    Var,
    fv,
    type_of,
    var_atom,
)
from .syntax import (
    Abs,
    AbsSort,
    App,
    BaseSort,
    Bot,
    Forall,
    Imp,
    NameSort,
    Pred,
    Signature,
    Sort,
    Susp,
    Tup,
    TupleSort,
    Unknown,
    free_unknowns,
)
from .text import ParseError, TokenStream


class DenotationError(ValueError):
    """Missing witnesses, ill-sorted values, or terms outside the supported fragment."""


# ---------------------------------------------------------------------------
# ground values


@dataclass(frozen=True)
class VAtom:
    atom: Atom


@dataclass(frozen=True)
class VTuple:
    items: tuple = ()


@dataclass(frozen=True)
class VCon:
    former: str
    arg: "GroundValue"


@dataclass(frozen=True)
class VBool:
    bit: int


@dataclass(frozen=True)
class VAbs:
    """``[a]v``.  The binder is normalised on construction so that equality is alpha-equality."""

    atom: Atom
    body: "GroundValue"

    def __post_init__(self):
        others = support(self.body) - {self.atom}
        c = next(Atom(self.atom.sort, i) for i in count(0) if Atom(self.atom.sort, i) not in others)
        if c != self.atom:
            object.__setattr__(self, "body", vperm(Permutation.swap(self.atom, c), self.body))
            object.__setattr__(self, "atom", c)


GroundValue = Union[VAtom, VTuple, VCon, VBool, VAbs]


def vatoms(*atoms: Atom) -> VTuple:
    return VTuple(tuple(VAtom(a) for a in atoms))


def vabs_list(atoms: Sequence[Atom], v: GroundValue) -> GroundValue:
    """``[a1][a2]...v``."""
    for a in reversed(tuple(atoms)):
        v = VAbs(a, v)
    return v


@lru_cache(maxsize=None)
def support(v: GroundValue) -> frozenset:
    match v:
        case VAtom(a):
            return frozenset({a})
        case VTuple(items):
            return frozenset().union(*(support(i) for i in items))
        case VCon(_, arg):
            return support(arg)
        case VBool():
            return frozenset()
        case VAbs(a, body):
            return support(body) - {a}
    raise DenotationError(f"not a ground value: {v!r}")


def vperm(pi: Permutation, v: GroundValue) -> GroundValue:
    if pi.is_identity():
        return v
    match v:
        case VAtom(a):
            return VAtom(pi(a))
        case VTuple(items):
            return VTuple(tuple(vperm(pi, i) for i in items))
        case VCon(f, arg):
            return VCon(f, vperm(pi, arg))
        case VBool():
            return v
        case VAbs(a, body):
            return VAbs(pi(a), vperm(pi, body))
    raise DenotationError(f"not a ground value: {v!r}")


def vrename(rho: Renaming, v: GroundValue) -> GroundValue:
    """Capture-avoiding renaming of a ground value (syntax is a renaming set)."""
    match v:
        case VAtom(a):
            return VAtom(rho(a))
        case VTuple(items):
            return VTuple(tuple(vrename(rho, i) for i in items))
        case VCon(f, arg):
            return VCon(f, vrename(rho, arg))
        case VBool():
            return v
        case VAbs(a, body):
            c = fresh_atom(a.sort, rho.nontriv() | support(body) | {a})
            return VAbs(c, vrename(rho, vperm(Permutation.swap(a, c), body)))
    raise DenotationError(f"not a ground value: {v!r}")


def abs_eq(x: VAbs, y: VAbs) -> bool:
    """``[a]u = [a']u'`` iff ``a = a'`` and ``u = u'``, or ``a' # u`` and ``(a' a).u = u'``."""
    a, u, a2, u2 = x.atom, x.body, y.atom, y.body
    if a == a2:
        return u == u2
    if a.sort != a2.sort:
        return False
    return a2 not in support(u) and vperm(Permutation.swap(a2, a), u) == u2


def free_order(v: GroundValue) -> list:
    """Free atoms in order of first occurrence (pre-order, left to right)."""
    out: list = []
    _free_order(v, frozenset(), out)
    return out


def _free_order(v, bound, out):
    match v:
        case VAtom(a):
            if a not in bound and a not in out:
                out.append(a)
        case VTuple(items):
            for i in items:
                _free_order(i, bound, out)
        case VCon(_, arg):
            _free_order(arg, bound, out)
        case VAbs(a, body):
            _free_order(body, bound | {a}, out)


def shape(v: GroundValue):
    """An equivariant fingerprint: free atoms by first occurrence, bound atoms by depth."""
    order = {a: i for i, a in enumerate(free_order(v))}

    def go(v, env):
        match v:
            case VAtom(a):
                return ("b", env[a]) if a in env else ("f", a.sort, order[a])
            case VTuple(items):
                return ("t",) + tuple(go(i, env) for i in items)
            case VCon(f, arg):
                return ("c", f, go(arg, env))
            case VBool(bit):
                return ("o", bit)
            case VAbs(a, body):
                return ("a", a.sort, go(body, {**env, a: len(env)}))

    return go(v, {})


def value_has_sort(sig: Signature, v: GroundValue, s: Sort) -> bool:
    match s, v:
        case NameSort(n), VAtom(a):
            return a.sort == n
        case TupleSort(items), VTuple(vs):
            return len(items) == len(vs) and all(value_has_sort(sig, x, t) for x, t in zip(vs, items))
        case AbsSort(nu, body), VAbs(a, x):
            return a.sort == nu and value_has_sort(sig, x, body)
        case BaseSort(n), VCon(f, arg):
            if f not in sig.term_formers:
                return False
            want, res = sig.term_formers[f]
            return res == n and value_has_sort(sig, arg, want)
    return False


def default_value(sig: Signature, s: Sort, pmss=None, fuel: int = 6) -> GroundValue:
    """The first small ground value of sort ``s`` whose support lies in ``pmss``."""
    for depth in range(fuel + 1):
        v = _default(sig, s, pmss, depth)
        if v is not None:
            return v
    raise DenotationError(f"no ground value of sort {s} found within depth {fuel}")


def _default(sig, s, pmss, fuel):
    if fuel < 0:
        return None
    match s:
        case NameSort(n):
            for i in count(-1, -1):
                a = Atom(n, i)
                if pmss is None or a in pmss:
                    return VAtom(a)
        case TupleSort(items):
            vs = [_default(sig, i, pmss, fuel - 1) for i in items]
            return None if any(v is None for v in vs) else VTuple(tuple(vs))
        case AbsSort(nu, body):
            b = _default(sig, body, pmss, fuel - 1)
            return None if b is None else VAbs(Atom(nu, 0), b)
        case BaseSort(n):
            for f in sorted(sig.term_formers):
                arg, res = sig.term_formers[f]
                if res != n:
                    continue
                v = _default(sig, arg, pmss, fuel - 1)
                if v is not None:
                    return VCon(f, v)
            return None
    raise DenotationError(f"not a sort: {s!r}")


# ---------------------------------------------------------------------------
# the free renaming-set extension Ren(-)


@dataclass(frozen=True)
class RenElement:
    """The class of ``(rho, value)``; build with :func:`ren` to get the canonical form.

    Canonical form: the free atoms of ``value`` are renamed, by first occurrence,
    to ``s#0, s#1, ...`` per sort, and ``rho`` is kept only on those atoms.
    """

    rho: Renaming
    value: GroundValue


def ren(rho: Renaming, value: GroundValue) -> RenElement:
    order = free_order(value)
    counters: dict = {}
    sigma = {}
    for a in order:
        k = counters.get(a.sort, 0)
        counters[a.sort] = k + 1
        sigma[a] = Atom(a.sort, k)
    perm = Permutation.extending(sigma)
    return RenElement(Renaming({c: rho(a) for a, c in sigma.items()}), vperm(perm, value))


def ren_id(value: GroundValue) -> RenElement:
    return ren(ID_REN, value)


def ren_eq(p: RenElement, q: RenElement) -> bool:
    return p == q


def ren_act(rho: Renaming, p: RenElement) -> RenElement:
    """``rho |> [(rho', x)] = [(rho o rho', x)]``."""
    return ren(rho.compose(p.rho), p.value)


def ren_perm(pi: Permutation, p: RenElement) -> RenElement:
    return ren_act(pi.as_renaming(), p)


def ren_support(p: RenElement) -> frozenset:
    return frozenset(p.rho(a) for a in support(p.value))


def is_injective_on_support(p: RenElement) -> bool:
    sup = support(p.value)
    return len({p.rho(a) for a in sup}) == len(sup)


def materialize(p: RenElement) -> GroundValue | None:
    """``rho.x`` as a plain ground value when ``rho`` is injective on ``supp(x)``."""
    if not is_injective_on_support(p):
        return None
    part = {a: p.rho(a) for a in support(p.value)}
    return vperm(Permutation.extending(part), p.value)


def normal_rep(p: RenElement, avoid: Iterable[Atom] = ()) -> tuple:
    """A representative ``(rho, x)`` where atoms with a unique preimage are fixed by ``rho``.

    Atoms of ``supp(x)`` whose image is shared are moved to fresh atoms outside
    ``avoid``, and ``rho`` sends those to the shared image.
    """
    sup = sorted(support(p.value))
    images: dict = {}
    for a in sup:
        images.setdefault(p.rho(a), []).append(a)
    blocked = set(avoid) | set(sup) | set(images)
    sigma, out = {}, {}
    for a in sup:
        t = p.rho(a)
        if len(images[t]) == 1:
            sigma[a] = t
        else:
            f = fresh_atom(a.sort, blocked)
            blocked.add(f)
            sigma[a] = f
            out[f] = t
    return Renaming(out), vperm(Permutation.extending(sigma), p.value)


def show_ren(p: RenElement) -> str:
    return f"{p.rho} |> {show_value(p.value)}"


# atoms-abstraction over Ren elements, i.e. elements of [A]Ren(X)


@dataclass(frozen=True)
class RenAbs:
    atom: Atom
    body: RenElement

    def __post_init__(self):
        others = ren_support(self.body) - {self.atom}
        c = next(Atom(self.atom.sort, i) for i in count(0) if Atom(self.atom.sort, i) not in others)
        if c != self.atom:
            object.__setattr__(self, "body", ren_perm(Permutation.swap(self.atom, c), self.body))
            object.__setattr__(self, "atom", c)


def ren_abs_support(x: RenAbs) -> frozenset:
    return ren_support(x.body) - {x.atom}


# ---------------------------------------------------------------------------
# functions out of atoms


@dataclass(frozen=True)
class AbsImage:
    """``lambda a. v``: sends ``n`` to ``[a->n].v``."""

    atom: Atom
    value: object


@dataclass(frozen=True)
class FiniteExc:
    """A function on atoms given by finitely many exceptions to a default rule.

    ``default`` is ``"id"`` for the identity or an atom for a constant function.
    """

    exceptions: tuple = ()
    default: object = "id"

    @staticmethod
    def of(exceptions: Mapping, default="id") -> "FiniteExc":
        return FiniteExc(tuple(sorted(exceptions.items())), default)


AtomFn = Union[AbsImage, FiniteExc]


def abs_fun_apply(f: AtomFn, n: Atom):
    match f:
        case AbsImage(a, v):
            r = Renaming.atomic(a, n) if a != n else ID_REN
            match v:
                case RenElement():
                    return ren_act(r, v)
                case Atom():
                    return r(v)
                case _:
                    return vrename(r, v)
        case FiniteExc(exc, default):
            table = dict(exc)
            if n in table:
                return VAtom(table[n])
            return VAtom(n) if default == "id" else VAtom(default)
    raise DenotationError(f"not an atom function: {f!r}")


def atom_fn_support(f: AtomFn) -> frozenset:
    match f:
        case AbsImage(a, RenElement() as p):
            return ren_support(p) - {a}
        case AbsImage(a, v):
            return support(v) - {a}
        case FiniteExc(exc, default):
            out = {x for pair in exc for x in pair}
            return frozenset(out | ({default} if isinstance(default, Atom) else set()))
    raise DenotationError(f"not an atom function: {f!r}")


# ---------------------------------------------------------------------------
# natural maps between the functors


def ren_pair_split(p: RenElement) -> tuple:
    """``rho |> (x1, ..., xn)`` to ``(rho |> x1, ..., rho |> xn)``."""
    if not isinstance(p.value, VTuple):
        raise DenotationError(f"not an element of a product: {show_ren(p)}")
    return tuple(ren(p.rho, x) for x in p.value.items)


def ren_abs_push(p: RenElement) -> RenAbs:
    """``rho |> [a]x`` to ``[a](rho |> x)``, first moving ``a`` clear of ``rho`` and ``x``."""
    if not isinstance(p.value, VAbs):
        raise DenotationError(f"not an element of an abstraction: {show_ren(p)}")
    a, x = p.value.atom, p.value.body
    c = fresh_atom(a.sort, p.rho.nontriv() | support(x) | {a})
    return RenAbs(c, ren(p.rho, vperm(Permutation.swap(a, c), x)))


def ren_atom_collapse(p: RenElement) -> Atom:
    if not isinstance(p.value, VAtom):
        raise DenotationError(f"not an element of Ren(A): {show_ren(p)}")
    return p.rho(p.value.atom)


def abs_fun(x: Union[VAbs, RenAbs]) -> AbsImage:
    return AbsImage(x.atom, x.body)


# ---------------------------------------------------------------------------
# the exploding pair carrier


STAR = "*"


def exploding_act(rho: Renaming, x):
    """Renaming action on ``(A x A) + {*}`` that collapses a pair whose atoms meet."""
    if x == STAR:
        return STAR
    a, b = x
    if a == b:
        return (rho(a), rho(a))
    if rho(a) == rho(b):
        return STAR
    return (rho(a), rho(b))


def exploding_support(x, universe: Sequence[Atom]) -> frozenset:
    """Least ``S`` within ``universe`` such that renamings agreeing on ``S`` act alike on ``x``."""
    from itertools import combinations, product

    universe = tuple(universe)
    maps = [Renaming(dict(zip(universe, img))) for img in product(universe, repeat=len(universe))]
    for k in range(len(universe) + 1):
        for S in combinations(universe, k):
            ok = True
            groups: dict = {}
            for r in maps:
                key = tuple(r(a) for a in S)
                got = exploding_act(r, x)
                if groups.setdefault(key, got) != got:
                    ok = False
                    break
            if ok:
                return frozenset(S)
    return frozenset(universe)


# ---------------------------------------------------------------------------
# PNL interpretations and denotation


@dataclass
class Predicate:
    name: str
    fn: Callable[[GroundValue], int]
    equivariant: bool = True
    source: str = ""

    def __call__(self, v: GroundValue) -> int:
        return int(self.fn(v))


def equal_pred(name: str) -> Predicate:
    def fn(v):
        return int(isinstance(v, VTuple) and len(set(v.items)) <= 1)
    return Predicate(name, fn, True, "builtin equal")


def shape_pred(name: str, salt: int = 0) -> Predicate:
    """A pseudo-random equivariant predicate keyed on :func:`shape`."""
    def fn(v):
        return zlib.crc32(repr((salt, shape(v))).encode()) & 1
    return Predicate(name, fn, True, f"builtin shape {salt}")


def const_pred(name: str, bit: int) -> Predicate:
    return Predicate(name, lambda v: bit, True, f"builtin const {bit}")


@dataclass
class PnlInterp:
    """Herbrand interpretation: carriers are ground values, term formers are free constructors."""

    sig: Signature
    preds: dict = field(default_factory=dict)

    def pred(self, P: str) -> Predicate:
        if P not in self.preds:
            raise DenotationError(f"no interpretation for proposition former {P}")
        return self.preds[P]


def herbrand(sig: Signature, preds: Mapping | None = None, salt: int = 0) -> PnlInterp:
    """Equality for binary same-sorted formers, a shape predicate for the rest."""
    out = {}
    for P, arg in sorted(sig.prop_formers.items()):
        if isinstance(arg, TupleSort) and len(arg.items) == 2 and arg.items[0] == arg.items[1]:
            out[P] = equal_pred(P)
        else:
            out[P] = shape_pred(P, salt)
    out.update(preds or {})
    return PnlInterp(sig, out)


@dataclass
class PnlValuation:
    """Unknowns to ground values; unmapped unknowns get :func:`default_value`."""

    sig: Signature
    values: dict = field(default_factory=dict)

    def __post_init__(self):
        for X, v in self.values.items():
            check_witness(self.sig, X, v)

    def get(self, X: Unknown) -> GroundValue:
        if X in self.values:
            return self.values[X]
        return default_value(self.sig, X.sort, X.pmss)

    def update(self, X: Unknown, v: GroundValue) -> "PnlValuation":
        out = PnlValuation(self.sig, dict(self.values))
        check_witness(self.sig, X, v)
        out.values[X] = v
        return out


def check_witness(sig: Signature, X: Unknown, v: GroundValue) -> None:
    if not value_has_sort(sig, v, X.sort):
        raise DenotationError(f"{show_value(v)} does not have sort {X.sort} of {X.name}")
    bad = sorted(a for a in support(v) if a not in X.pmss)
    if bad:
        raise DenotationError(f"{show_value(v)} mentions {bad[0]}, outside pmss({X.name})")


def denote_term(I: PnlInterp, s: PnlValuation, r) -> GroundValue:
    match r:
        case Atom():
            return VAtom(r)
        case Tup(items):
            return VTuple(tuple(denote_term(I, s, i) for i in items))
        case App(f, arg):
            return VCon(f, denote_term(I, s, arg))
        case Abs(a, body):
            return VAbs(a, denote_term(I, s, body))
        case Susp(pi, X):
            return vperm(pi, s.get(X))
    raise DenotationError(f"not a PNL term: {r!r}")


def _lookup_witnesses(witnesses: Mapping | None, X: Unknown, hint: str = ""):
    witnesses = witnesses or {}
    for key in (X, X.name, hint):
        if key in witnesses:
            return list(witnesses[key])
    raise DenotationError(f"no witness list for the quantifier over {hint or X.name}")


def denote_prop(I: PnlInterp, s: PnlValuation, phi, witnesses: Mapping | None = None) -> int:
    """Truth value of ``phi``; a quantifier takes the minimum over its witness list only."""
    match phi:
        case Bot():
            return 0
        case Imp(l, r):
            return max(1 - denote_prop(I, s, l, witnesses), denote_prop(I, s, r, witnesses))
        case Pred(P, arg):
            return I.pred(P)(denote_term(I, s, arg))
        case Forall(X, body, hint):
            ws = _lookup_witnesses(witnesses, X, hint)
            if not ws:
                raise DenotationError(f"empty witness list for {hint or X.name}")
            return min(denote_prop(I, s.update(X, w), body, witnesses) for w in ws)
    raise DenotationError(f"not a PNL proposition: {phi!r}")


# ---------------------------------------------------------------------------
# the translated HOL fragment


@dataclass
class HolValuation:
    """HOL variables by name; atom variables default to ``id |> a``."""

    vars: dict = field(default_factory=dict)
    atoms: dict = field(default_factory=dict)

    def atom(self, a: Atom) -> RenElement:
        return self.atoms.get(a) or ren_id(VAtom(a))

    def bind(self, v: Var, x) -> "HolValuation":
        if v.is_atom:
            return HolValuation(self.vars, {**self.atoms, var_atom(v): x})
        return HolValuation({**self.vars, v.name: x}, self.atoms)

    def mentioned(self) -> frozenset:
        out = set()
        for a, p in self.atoms.items():
            out |= {a} | ren_support(p)
        return frozenset(out)


def valuation_lift(st, D: Sequence[Atom], s: PnlValuation, unknowns: Iterable[Unknown]) -> HolValuation:
    """``X_D`` goes to ``id |> [D & pmss X] s(X)``; atoms go to ``id |> a``."""
    from .translate import restrict_dlist

    out = {}
    for X in unknowns:
        out[st.xd(X, D).name] = ren_id(vabs_list(restrict_dlist(D, X.pmss), s.get(X)))
    return HolValuation(out)


def lift_witnesses(st, D: Sequence[Atom], phi, witnesses: Mapping) -> dict:
    """Match a PNL witness map to the raised quantifiers of ``[[phi]]_D``."""
    from .translate import restrict_dlist

    out = {}

    def go(p):
        match p:
            case Imp(l, r):
                go(l)
                go(r)
            case Forall(X, body, hint):
                ws = _lookup_witnesses(witnesses, X, hint)
                gamma = restrict_dlist(D, X.pmss)
                out[st.xd(X, D).name] = [ren_id(vabs_list(gamma, w)) for w in ws]
                go(body)

    go(phi)
    return out


@dataclass
class HolDenoter:
    """Denotation of HOL terms in the translated fragment, derived from a PNL interpretation."""

    interp: PnlInterp
    st: object
    witnesses: dict = field(default_factory=dict)

    def pnl_type(self, ty: HType) -> bool:
        sig = self.interp.sig
        match ty:
            case HBase(n):
                return n.startswith("mu_") and n[3:] in (sig.atom_sorts | sig.base_sorts)
            case HTuple(items):
                return all(self.pnl_type(i) for i in items)
            case HArrow(HBase(n), body):
                return n.startswith("mu_") and n[3:] in sig.atom_sorts and self.pnl_type(body)
        return False

    def const(self, c: Const):
        if c == HBOT:
            return 0
        if c == HIMP:
            return lambda x: lambda y: max(1 - x, y)
        if c.name == "forall":
            raise DenotationError("a quantifier must be applied to a lambda to be evaluated")
        name = c.name[2:] if c.name.startswith("g_") else None
        sig = self.interp.sig
        if name in sig.term_formers:
            return lambda p: ren(p.rho, VCon(name, p.value))
        if name in sig.prop_formers:
            P = self.interp.pred(name)

            def pred(p):
                v = materialize(p)
                return P(p.value if v is None else v)
            return pred
        raise DenotationError(f"unsupported constant {c.name}")

    def eval(self, t: HTerm, env: HolValuation):
        match t:
            case Var(name, _, True):
                return env.atom(var_atom(t))
            case Var(name):
                if name not in env.vars:
                    raise DenotationError(f"variable {name} has no value")
                return env.vars[name]
            case Const():
                return self.const(t)
            case HApp(Const(name="forall"), Lam(x, body)):
                if x.name not in self.witnesses:
                    raise DenotationError(f"no witness list for the quantifier over {x.name}")
                ws = self.witnesses[x.name]
                if not ws:
                    raise DenotationError(f"empty witness list for {x.name}")
                return min(self.eval(body, env.bind(x, w)) for w in ws)
            case HApp(f, u):
                # g_var : mu_nu -> mu_iota has the type of an abstraction but denotes
                # a function, so dispatch on the value rather than the type
                head = self.eval(f, env)
                if callable(head):
                    return head(self.eval(u, env))
                if self.pnl_type(type_of(f)):
                    return self._concrete(head, u, env)
                raise DenotationError(f"cannot apply {show_value(head)}")
            case Lam(x, body):
                if x.is_atom and self.pnl_type(type_of(t)):
                    return self._abstract(x, body, env)
                return lambda v: self.eval(body, env.bind(x, v))
            case HTup(items):
                if all(self.pnl_type(type_of(i)) for i in items):
                    return self._tuple(items, env)
                return tuple(self.eval(i, env) for i in items)
        raise DenotationError(f"unsupported construct {t!r}")

    def _avoid(self, t: HTerm, env: HolValuation) -> set:
        out = set(env.mentioned())
        for v in fv(t):
            if v.is_atom:
                out.add(var_atom(v))
            elif v.name in env.vars and isinstance(env.vars[v.name], RenElement):
                out |= ren_support(env.vars[v.name])
        return out

    def _abstract(self, x: Var, body: HTerm, env: HolValuation) -> RenElement:
        a = var_atom(x)
        avoid = self._avoid(body, env) | {a}
        c = fresh_atom(a.sort, avoid)
        p = self.eval(body, env.bind(x, ren_id(VAtom(c))))
        rho, v = normal_rep(p, avoid | {c})
        return ren(rho, VAbs(c, v))

    def _concrete(self, p: RenElement, u: HTerm, env: HolValuation) -> RenElement:
        b = ren_atom_collapse(self.eval(u, env))
        if not isinstance(p.value, VAbs):
            raise DenotationError(f"expected an abstraction, got {show_ren(p)}")
        a, x = p.value.atom, p.value.body
        c = fresh_atom(a.sort, p.rho.nontriv() | support(x) | {a, b})
        x = vperm(Permutation.swap(a, c), x)
        return ren(Renaming.atomic(c, b).compose(p.rho), x)

    def _tuple(self, items, env: HolValuation) -> RenElement:
        ps = [self.eval(i, env) for i in items]
        avoid = set()
        for p in ps:
            avoid |= set(support(p.value)) | ren_support(p)
        rho, xs = {}, []
        for p in ps:
            r, x = normal_rep(p, avoid)
            avoid |= set(r.dom())
            rho.update(dict(r.items()))
            xs.append(x)
        return ren(Renaming(rho), VTuple(tuple(xs)))


def hol_denote(I: PnlInterp, st, env: HolValuation, t: HTerm, witnesses: Mapping | None = None):
    return HolDenoter(I, st, dict(witnesses or {})).eval(t, env)


def square_check(I: PnlInterp, st, phi, s: PnlValuation, D: Sequence[Atom] | None = None,
                 witnesses: Mapping | None = None) -> tuple:
    """Both denotations of ``phi``: directly, and through ``[[-]]_D`` and the HOL fragment."""
    from .translate import capture_infer_minimal, translate

    if D is None:
        D = capture_infer_minimal([phi])
    env = valuation_lift(st, D, s, free_unknowns(phi))
    hw = lift_witnesses(st, D, phi, witnesses or {})
    left = denote_prop(I, s, phi, witnesses)
    right = hol_denote(I, st, env, translate(st, D, phi), hw)
    return left, right


def term_square_check(I: PnlInterp, st, r, s: PnlValuation, D: Sequence[Atom] | None = None) -> tuple:
    from .translate import capture_infer_minimal, translate

    if D is None:
        D = capture_infer_minimal([r])
    env = valuation_lift(st, D, s, free_unknowns(r))
    return ren_id(denote_term(I, s, r)), hol_denote(I, st, env, translate(st, D, r))


# ---------------------------------------------------------------------------
# text formats


def show_value(v) -> str:
    match v:
        case VAtom(a):
            return str(a)
        case VTuple(items):
            if len(items) == 1:
                return f"({show_value(items[0])},)"
            return "(" + ", ".join(show_value(i) for i in items) + ")"
        case VCon(f, VTuple(items)) if len(items) != 1:
            return f + "(" + ", ".join(show_value(i) for i in items) + ")"
        case VCon(f, arg):
            return f"{f}({show_value(arg)})"
        case VBool(bit):
            return str(bit)
        case VAbs(a, body) | PAbs(a, body):
            return f"[{a}]{show_value(body)}"
        case RenElement():
            return show_ren(v)
        case RenAbs(a, body):
            return f"[{a}]({show_ren(body)})"
        case AbsImage(a, x):
            return f"\\{a}. {show_value(x)}"
        case FiniteExc(exc, default):
            rule = ", ".join(f"{x}->{y}" for x, y in exc)
            return f"fn{{{rule}; else {default}}}"
        case "_":
            return "_"
        case _ if isinstance(v, int):
            return str(v)
    raise DenotationError(f"cannot print {v!r}")


def show_carrier_value(sort: Sort, v) -> str:
    """A value prefixed by its carrier descriptor, e.g. ``iota: var(nu#-1)``."""
    return f"{sort}: {show_value(v)}"


WILD = "_"


class ValueParser(TokenStream):
    def __init__(self, text: str, sig: Signature | None = None, patterns: bool = False):
        super().__init__(text)
        self.sig = sig
        self.patterns = patterns

    def value(self):
        t = self.peek()
        if t.kind == "atom":
            return VAtom(self.atom())
        if t.kind == "int" and t.value in ("0", "1"):
            self.next()
            return VBool(int(t.value))
        if self.accept("["):
            a = self.atom()
            self.expect("]")
            body = self.value()
            return PAbs(a, body) if self.patterns and _has_wild(body) else VAbs(a, body)
        if self.at("("):
            self.next()
            items = []
            trailing = False
            while not self.at(")"):
                items.append(self.value())
                trailing = False
                if not self.accept(","):
                    break
                trailing = True
            self.expect(")")
            if len(items) == 1 and not trailing:
                return items[0]
            return VTuple(tuple(items))
        if t.kind == "name":
            self.next()
            if t.value == WILD and self.patterns:
                return WILD
            if self.sig is not None and t.value not in self.sig.term_formers:
                raise ParseError(f"undeclared term former {t.value}", self.text, t.pos)
            self.expect("(")
            items = []
            while not self.at(")"):
                items.append(self.value())
                if not self.accept(","):
                    break
            self.expect(")")
            return VCon(t.value, items[0] if len(items) == 1 else VTuple(tuple(items)))
        self.fail("expected a ground value")


@dataclass(frozen=True)
class PAbs:
    """An abstraction pattern whose body contains a wildcard."""

    atom: Atom
    body: object


def _has_wild(p) -> bool:
    match p:
        case "_":
            return True
        case VTuple(items):
            return any(_has_wild(i) for i in items)
        case VCon(_, arg):
            return _has_wild(arg)
        case PAbs():
            return True
    return False


def parse_value(text: str, sig: Signature | None = None) -> GroundValue:
    p = ValueParser(text, sig)
    v = p.value()
    p.done()
    return v


def parse_pattern(text: str, sig: Signature | None = None):
    p = ValueParser(text, sig, patterns=True)
    v = p.value()
    p.done()
    return v


def matches(pat, v: GroundValue) -> bool:
    match pat:
        case "_":
            return True
        case VTuple(ps):
            return isinstance(v, VTuple) and len(ps) == len(v.items) and all(
                matches(p, x) for p, x in zip(ps, v.items))
        case VCon(f, p):
            return isinstance(v, VCon) and v.former == f and matches(p, v.arg)
        case PAbs(a, p):
            if not isinstance(v, VAbs) or v.atom.sort != a.sort:
                return False
            if v.atom == a:
                return matches(p, v.body)
            if a in support(v):
                return False
            return matches(p, vperm(Permutation.swap(a, v.atom), v.body))
    return pat == v


def pattern_atoms(pat) -> frozenset:
    match pat:
        case "_":
            return frozenset()
        case VTuple(ps):
            return frozenset().union(*(pattern_atoms(p) for p in ps))
        case VCon(_, p):
            return pattern_atoms(p)
        case PAbs(a, p):
            return pattern_atoms(p) - {a}
    return support(pat)


def table_pred(name: str, cases: list, default: int, equivariant: bool) -> Predicate:
    """First matching case wins; ``cases`` is a list of ``(pattern, bit)``."""
    mentioned = frozenset().union(*(pattern_atoms(p) for p, _ in cases)) if cases else frozenset()
    if equivariant and mentioned:
        raise DenotationError(
            f"predicate {name} is tagged equivariant but its table mentions {sorted(mentioned)[0]}")

    def fn(v):
        for p, bit in cases:
            if matches(p, v):
                return bit
        return default

    src = "; ".join(f"{show_value(p)} -> {b}" for p, b in cases) + f"; default {default}"
    return Predicate(name, fn, equivariant, src)


def parse_interpretation(text: str, sig: Signature) -> PnlInterp:
    """Read an interpretation file.

    ``predicate NAME equivariant|supported`` starts a table; following lines are
    ``case PATTERN -> 0|1``, ``default 0|1`` or ``builtin equal|shape N|const B``.
    Formers that are not mentioned get the defaults of :func:`herbrand`.
    """
    preds: dict = {}
    current = None

    def close():
        if current is None:
            return
        name, tag, cases, default, builtin = current
        if builtin is not None:
            preds[name] = builtin
            preds[name].equivariant = tag == "equivariant"
        else:
            if default is None:
                raise ParseError(f"predicate {name} has no default line")
            preds[name] = table_pred(name, cases, default, tag == "equivariant")

    for line in text.splitlines():
        line = line.split(";", 1)[0].strip()
        if not line:
            continue
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        if kw == "predicate":
            close()
            parts = rest.split()
            if len(parts) != 2 or parts[1] not in ("equivariant", "supported"):
                raise ParseError(f"expected 'predicate NAME equivariant|supported', got {line!r}")
            if parts[0] not in sig.prop_formers:
                raise ParseError(f"undeclared proposition former {parts[0]}")
            current = [parts[0], parts[1], [], None, None]
        elif current is None:
            raise ParseError(f"{kw!r} line outside a predicate block")
        elif kw == "case":
            pat, arrow, bit = rest.rpartition("->")
            if not arrow or bit.strip() not in ("0", "1"):
                raise ParseError(f"expected 'case PATTERN -> 0|1', got {line!r}")
            current[2].append((parse_pattern(pat, sig), int(bit)))
        elif kw == "default":
            if rest not in ("0", "1"):
                raise ParseError(f"expected 'default 0|1', got {line!r}")
            current[3] = int(rest)
        elif kw == "builtin":
            name = current[0]
            words = rest.split()
            if words == ["equal"]:
                current[4] = equal_pred(name)
            elif len(words) == 2 and words[0] == "shape":
                current[4] = shape_pred(name, int(words[1]))
            elif len(words) == 2 and words[0] == "const" and words[1] in ("0", "1"):
                current[4] = const_pred(name, int(words[1]))
            else:
                raise ParseError(f"unknown builtin {rest!r}")
        else:
            raise ParseError(f"unknown interpretation keyword {kw!r}")
    close()
    return herbrand(sig, preds)


def parse_valuation(sig: Signature, items: Iterable[str]) -> PnlValuation:
    """``NAME=VALUE`` pairs over the unknowns declared in ``sig``."""
    values = {}
    for item in items:
        name, eq, text = item.partition("=")
        name = name.strip()
        if not eq or name not in sig.unknowns:
            raise ParseError(f"expected NAME=VALUE with a declared unknown, got {item!r}")
        values[sig.unknowns[name]] = parse_value(text, sig)
    return PnlValuation(sig, values)



# ---------------------------------------------------------------------------
# fixtures for the natural maps between Ren, products, abstraction and functions


@dataclass
class FixtureResult:
    name: str
    claim: str
    expected: bool
    observed: bool
    detail: str = ""
    supplementary: bool = False

    @property
    def ok(self) -> bool:
        return self.expected == self.observed

    def to_dict(self) -> dict:
        return {"name": self.name, "claim": self.claim, "expected": self.expected,
                "observed": self.observed, "ok": self.ok, "detail": self.detail,
                "supplementary": self.supplementary}


def _set_partitions(n: int):
    """Restricted growth strings of length ``n``."""
    def go(prefix, top):
        if len(prefix) == n:
            yield tuple(prefix)
            return
        for k in range(top + 2):
            yield from go(prefix + [k], max(top, k))
    yield from go([], -1)


def _renamings_into(dom: Sequence[Atom], targets: Sequence[Atom]):
    from itertools import product

    for img in product(targets, repeat=len(dom)):
        yield Renaming(dict(zip(dom, img)))


def pair_split_preimages(target: tuple, sort: str = "nu", limit: int = 1) -> list:
    """Canonical elements of ``Ren((A x A) x (A x A))`` splitting to ``target``."""
    goal = frozenset().union(*(ren_support(p) for p in target))
    out = []
    for rgs in _set_partitions(4):
        atoms = [Atom(sort, k) for k in rgs]
        value = VTuple((vatoms(*atoms[:2]), vatoms(*atoms[2:])))
        dom = sorted(support(value))
        for rho in _renamings_into(dom, sorted(goal)):
            p = ren(rho, value)
            if ren_pair_split(p) == target:
                out.append(p)
                if len(out) >= limit:
                    return out
    return out


def abs_push_preimages(target: RenAbs, extra: int = 2, limit: int = 1) -> list:
    """Canonical elements ``rho |> [c](x, y)`` of ``Ren([A](A x A))`` pushing to ``target``."""
    sort = target.atom.sort
    goal = sorted(ren_abs_support(target))
    pool = goal + [fresh for fresh in
                   (Atom(sort, 100 + i) for i in range(extra))]
    out = []
    binder = Atom(sort, 50)
    for rgs in _set_partitions(2):
        for bound in ((), (0,), (1,), (0, 1)):
            atoms = [binder if i in bound else Atom(sort, k) for i, k in enumerate(rgs)]
            value = VAbs(binder, vatoms(*atoms))
            dom = sorted(support(value))
            for rho in _renamings_into(dom, pool):
                p = ren(rho, value)
                if ren_abs_push(p) == target:
                    out.append(p)
                    if len(out) >= limit:
                        return out
    return out


def natural_map_fixtures(a: Atom | None = None, b: Atom | None = None) -> list:
    """Run the witnesses for the four natural maps and compare with the stated verdicts."""
    a = a or Atom("nu", -1)
    b = b or Atom("nu", -2)
    c = Atom("nu", 0)
    universe = (a, b, c, Atom("nu", 1))
    out = []

    # Ren(A) -> A is a bijection
    bad = []
    for rho in _renamings_into(universe, universe):
        for x in universe:
            p = ren(rho, VAtom(x))
            if ren_atom_collapse(p) != rho(x) or p != ren_id(VAtom(rho(x))):
                bad.append(show_ren(p))
    for n in universe:
        if ren_atom_collapse(ren_id(VAtom(n))) != n:
            bad.append(str(n))
    out.append(FixtureResult(
        "atom-collapse-bijective", "Ren(A) -> A, rho|>a to rho(a), is a bijection",
        True, not bad, f"checked {len(universe) ** len(universe)} renamings on {len(universe)} atoms"
        + (f"; counterexample {bad[0]}" if bad else "")))

    # Ren(X x Y) -> Ren(X) x Ren(Y) is not injective
    p = ren(Renaming.atomic(a, b), vatoms(a, b))
    q = ren_id(vatoms(b, b))
    same = ren_pair_split(p) == ren_pair_split(q)
    out.append(FixtureResult(
        "pair-split-not-injective", "[a->b]|>(a,b) and id|>(b,b) differ but split alike",
        True, same and p != q,
        f"sources {show_ren(p)} and {show_ren(q)}; equal images: {same}"))

    # ... nor surjective, with X = Y = A x A
    target = (ren(Renaming.atomic(a, b), vatoms(a, b)), ren(Renaming.atomic(b, a), vatoms(a, b)))
    pre = pair_split_preimages(target)
    out.append(FixtureResult(
        "pair-split-not-surjective",
        "([a->b]|>(a,b), [b->a]|>(a,b)) has no preimage in Ren((A x A) x (A x A))",
        True, not pre,
        f"preimage found: {show_ren(pre[0])}" if pre else "no canonical preimage"))

    # Ren([A]X) -> [A]Ren(X) is not surjective, X = A x A
    u = ren(Renaming.atomic(a, b), vatoms(a, b))
    for label, binder in (("abs-push-not-surjective", a), ("abs-push-not-surjective-bound-b", b)):
        target = RenAbs(binder, u)
        pre = abs_push_preimages(target)
        claim = f"[{binder}]([a->b]|>(a,b)) has no preimage in Ren([A](A x A))"
        detail = (f"supp of the body is {{{', '.join(map(str, sorted(ren_support(u))))}}}; "
                  + (f"preimage found: {show_ren(pre[0])}" if pre else "no canonical preimage"))
        out.append(FixtureResult(label, claim, True, not pre, detail, supplementary=binder == b))

    # [A]Y -> (A => Y) is not surjective, Y = A
    swap = FiniteExc.of({a: b, b: a})
    probe = (a, b, c)
    pool = probe + (Atom("nu", 1),)
    hit = [AbsImage(x, VAtom(y)) for x in pool for y in pool
           if all(abs_fun_apply(AbsImage(x, VAtom(y)), n) == abs_fun_apply(swap, n) for n in probe)]
    out.append(FixtureResult(
        "abs-fun-not-surjective", "the swap (a b) on atoms is no \\x.v",
        True, not hit,
        f"compared with {len(pool) ** 2} functions \\x.y on probe {{a, b, c}}"
        + (f"; match {show_value(hit[0])}" if hit else "")))
    return out
