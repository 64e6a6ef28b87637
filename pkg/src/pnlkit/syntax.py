"""PNL sorts, signatures, terms and propositions.

Terms and propositions are frozen dataclasses.  The functions in this module
accept any representative of an alpha-class and return the canonical one (see
:func:`canon`), so two values are alpha-equivalent exactly when their
canonical forms are ``==``.

Atoms are used directly as terms.  A moderated unknown ``pi.X`` is a
:class:`Susp`, and ``X`` on its own is ``Susp(ID, X)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import count
from typing import Iterable, Mapping, Union

from .atoms import (
    DOWN,
    EMPTY,
    ID,
    Atom,
    AtomSetExpr,
    PermissionSet,
    Permutation,
    fresh_atom,
)


class SortError(TypeError):
    """Ill-sorted syntax or a malformed signature."""


class SubstError(ValueError):
    """A substitution whose side conditions fail."""


class PermissionViolation(SubstError):
    def __init__(self, unknown: "Unknown", atom: Atom):
        self.unknown = unknown
        self.atom = atom
        super().__init__(f"{atom} not in pmss({unknown.name})")


# ---------------------------------------------------------------------------
# sorts


@dataclass(frozen=True)
class NameSort:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class BaseSort:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TupleSort:
    items: tuple = ()

    def __str__(self) -> str:
        if len(self.items) == 1:
            return f"({self.items[0]},)"
        return "(" + ", ".join(map(str, self.items)) + ")"


@dataclass(frozen=True)
class AbsSort:
    atom_sort: str
    body: "Sort"

    def __str__(self) -> str:
        return f"[{self.atom_sort}]{self.body}"


Sort = Union[NameSort, BaseSort, TupleSort, AbsSort]
UNIT = TupleSort(())


# ---------------------------------------------------------------------------
# unknowns, terms, propositions


@dataclass(frozen=True)
class Unknown:
    """A level-2 variable.  Two unknowns are the same when all fields agree."""

    name: str
    sort: Sort
    pmss: PermissionSet = DOWN

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Tup:
    items: tuple = ()

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True)
class App:
    former: str
    arg: "Term"

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True)
class Abs:
    atom: Atom
    body: "Term"

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True)
class Susp:
    pi: Permutation
    unknown: Unknown

    def __str__(self) -> str:
        return _show(self)


Term = Union[Atom, Tup, App, Abs, Susp]


@dataclass(frozen=True)
class Bot:
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Imp:
    left: "Prop"
    right: "Prop"

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True)
class Pred:
    former: str
    arg: Term

    def __str__(self) -> str:
        return _show(self)


@dataclass(frozen=True)
class Forall:
    unknown: Unknown
    body: "Prop"
    # the name the binder was written with; ignored by equality
    hint: str = field(default="", compare=False)

    def __str__(self) -> str:
        return _show(self)


Prop = Union[Bot, Imp, Pred, Forall]
Syntax = Union[Term, Prop]
BOT = Bot()


def _show(t) -> str:
    from .text import show

    return show(t)


def var(X: Unknown, pi: Permutation = ID) -> Susp:
    """``pi.X`` with ``pi`` cut down to ``pmss(X)``."""
    return Susp(pi.restrict(lambda a: a in X.pmss), X)


def tup(*items: Term) -> Tup:
    return Tup(tuple(items))


def imp(*props: Prop) -> Prop:
    """Right-nested implication ``p1 => p2 => ... => pn``."""
    out = props[-1]
    for p in reversed(props[:-1]):
        out = Imp(p, out)
    return out


# ---------------------------------------------------------------------------
# signatures


@dataclass
class Signature:
    """Declared sorts and formers, plus named unknowns and axioms for convenience.

    ``term_formers`` maps ``f`` to ``(argument sort, result base sort name)``;
    ``prop_formers`` maps ``P`` to its argument sort.
    """

    atom_sorts: frozenset = frozenset()
    base_sorts: frozenset = frozenset()
    term_formers: dict = field(default_factory=dict)
    prop_formers: dict = field(default_factory=dict)
    unknowns: dict = field(default_factory=dict)
    axioms: dict = field(default_factory=dict)

    def __post_init__(self):
        self.atom_sorts = frozenset(self.atom_sorts)
        self.base_sorts = frozenset(self.base_sorts)
        if self.atom_sorts & self.base_sorts:
            raise SortError(f"sorts declared twice: {sorted(self.atom_sorts & self.base_sorts)}")
        clash = set(self.term_formers) & set(self.prop_formers)
        if clash:
            raise SortError(f"former names used twice: {sorted(clash)}")
        for f, (arg, res) in self.term_formers.items():
            self.check_sort(arg)
            if res not in self.base_sorts:
                raise SortError(f"term former {f} must return a base sort, not {res}")
        for arg in self.prop_formers.values():
            self.check_sort(arg)
        for X in self.unknowns.values():
            self.check_sort(X.sort)

    def check_sort(self, s: Sort) -> Sort:
        match s:
            case NameSort(n):
                if n not in self.atom_sorts:
                    raise SortError(f"undeclared name sort {n}")
            case BaseSort(n):
                if n not in self.base_sorts:
                    raise SortError(f"undeclared base sort {n}")
            case TupleSort(items):
                for i in items:
                    self.check_sort(i)
            case AbsSort(nu, body):
                if nu not in self.atom_sorts:
                    raise SortError(f"abstraction over {nu}, which is not a name sort")
                self.check_sort(body)
            case _:
                raise SortError(f"not a sort: {s!r}")
        return s

    def declare(self, X: Unknown) -> Unknown:
        self.check_sort(X.sort)
        old = self.unknowns.get(X.name)
        if old is not None and old != X:
            raise SortError(f"unknown {X.name} is already declared with a different sort or permission set")
        self.unknowns[X.name] = X
        return X


# ---------------------------------------------------------------------------
# sort checking


def sort_of(sig: Signature, r: Term) -> Sort:
    match r:
        case Atom(s, _):
            if s not in sig.atom_sorts:
                raise SortError(f"atom {r} has undeclared sort {s}")
            return NameSort(s)
        case Tup(items):
            return TupleSort(tuple(sort_of(sig, i) for i in items))
        case App(f, arg):
            if f not in sig.term_formers:
                raise SortError(f"undeclared term former {f}")
            want, res = sig.term_formers[f]
            got = sort_of(sig, arg)
            if got != want:
                raise SortError(f"{f} expects an argument of sort {want}, got {got}")
            return BaseSort(res)
        case Abs(a, body):
            if not isinstance(a, Atom):
                raise SortError(f"abstraction over a non-atom {a!r}")
            if a.sort not in sig.atom_sorts:
                raise SortError(f"atom {a} has undeclared sort {a.sort}")
            return AbsSort(a.sort, sort_of(sig, body))
        case Susp(pi, X):
            return sig.check_sort(X.sort)
    raise SortError(f"not a term: {r!r}")


def check_prop(sig: Signature, phi: Prop) -> None:
    match phi:
        case Bot():
            return
        case Imp(l, r):
            check_prop(sig, l)
            check_prop(sig, r)
        case Pred(P, arg):
            if P not in sig.prop_formers:
                raise SortError(f"undeclared proposition former {P}")
            want, got = sig.prop_formers[P], sort_of(sig, arg)
            if got != want:
                raise SortError(f"{P} expects an argument of sort {want}, got {got}")
        case Forall(X, body):
            sig.check_sort(X.sort)
            check_prop(sig, body)
        case _:
            raise SortError(f"not a proposition: {phi!r}")


# ---------------------------------------------------------------------------
# free atoms and unknowns


@lru_cache(maxsize=1 << 16)
def free_atoms(t: Syntax) -> AtomSetExpr:
    match t:
        case Atom():
            return AtomSetExpr.finite({t})
        case Tup(items):
            out = EMPTY
            for i in items:
                out = out.union(free_atoms(i))
            return out
        case App(_, arg) | Pred(_, arg):
            return free_atoms(arg)
        case Abs(a, body):
            return free_atoms(body).minus({a})
        case Susp(pi, X):
            return X.pmss.to_expr().perm_image(pi)
        case Bot():
            return EMPTY
        case Imp(l, r):
            return free_atoms(l).union(free_atoms(r))
        case Forall(_, body):
            return free_atoms(body)
    raise TypeError(f"not PNL syntax: {t!r}")


@lru_cache(maxsize=1 << 16)
def free_unknowns(t: Syntax) -> frozenset:
    match t:
        case Atom() | Bot():
            return frozenset()
        case Tup(items):
            return frozenset().union(*(free_unknowns(i) for i in items))
        case App(_, arg) | Pred(_, arg) | Abs(_, arg):
            return free_unknowns(arg)
        case Susp(_, X):
            return frozenset({X})
        case Imp(l, r):
            return free_unknowns(l) | free_unknowns(r)
        case Forall(X, body):
            return free_unknowns(body) - {X}
    raise TypeError(f"not PNL syntax: {t!r}")


def free_atoms_of(props: Iterable[Syntax]) -> AtomSetExpr:
    out = EMPTY
    for p in props:
        out = out.union(free_atoms(p))
    return out


def free_unknowns_of(props: Iterable[Syntax]) -> frozenset:
    return frozenset().union(*(free_unknowns(p) for p in props))


# ---------------------------------------------------------------------------
# the two permutation actions (on raw representatives)


def _act(pi: Permutation, t: Syntax) -> Syntax:
    match t:
        case Atom():
            return pi(t)
        case Tup(items):
            return Tup(tuple(_act(pi, i) for i in items))
        case App(f, arg):
            return App(f, _act(pi, arg))
        case Abs(a, body):
            return Abs(pi(a), _act(pi, body))
        case Susp(p, X):
            return Susp(pi.compose(p), X)
        case Bot():
            return t
        case Imp(l, r):
            return Imp(_act(pi, l), _act(pi, r))
        case Pred(P, arg):
            return Pred(P, _act(pi, arg))
        case Forall(X, body, hint):
            return Forall(X, _act(pi, body), hint)
    raise TypeError(f"not PNL syntax: {t!r}")


def _act2(Pi: Mapping, t: Syntax) -> Syntax:
    match t:
        case Atom() | Bot():
            return t
        case Tup(items):
            return Tup(tuple(_act2(Pi, i) for i in items))
        case App(f, arg):
            return App(f, _act2(Pi, arg))
        case Abs(a, body):
            return Abs(a, _act2(Pi, body))
        case Susp(p, X):
            return Susp(p, Pi.get(X, X))
        case Imp(l, r):
            return Imp(_act2(Pi, l), _act2(Pi, r))
        case Pred(P, arg):
            return Pred(P, _act2(Pi, arg))
        case Forall(X, body, hint):
            return Forall(Pi.get(X, X), _act2(Pi, body), hint)
    raise TypeError(f"not PNL syntax: {t!r}")


def permute(pi: Permutation, t: Syntax) -> Syntax:
    """Level-1 action ``pi . t``."""
    return canon(_act(pi, t))


def check_unknown_bijection(Pi: Mapping) -> None:
    if set(Pi) != set(Pi.values()):
        raise SortError("level-2 permutation is not a bijection on its domain")
    for X, Y in Pi.items():
        if X.sort != Y.sort or X.pmss != Y.pmss:
            raise SortError(f"level-2 permutation maps {X.name} to {Y.name} "
                            "with a different sort or permission set")


def permute_unknowns(Pi: Mapping, t: Syntax) -> Syntax:
    """Level-2 action ``Pi . t`` for a finite bijection on unknowns."""
    Pi = {X: Y for X, Y in Pi.items() if X != Y}
    check_unknown_bijection(Pi)
    return canon(_act2(Pi, t))


def unknown_swap(X: Unknown, Y: Unknown) -> dict:
    return {X: Y, Y: X}


# ---------------------------------------------------------------------------
# canonical forms


def canon(t: Syntax) -> Syntax:
    """The canonical representative of the alpha-class of ``t``.

    Atom binders become the first up atom not free in the abstraction, and
    unknown binders are renamed ``_0, _1, ...`` in pre-order, skipping the
    names of free unknowns.  Suspended permutations are cut down to the
    permission set of their unknown.
    """
    taken = {X.name for X in free_unknowns(t)}
    names = (f"_{k}" for k in count() if f"_{k}" not in taken)
    return _canon(t, {}, names)


def _canon(t: Syntax, env: dict, names) -> Syntax:
    match t:
        case Atom():
            return t
        case Tup(items):
            return Tup(tuple(_canon(i, env, names) for i in items))
        case App(f, arg):
            return App(f, _canon(arg, env, names))
        case Abs(a, body):
            c = fresh_atom(a.sort, free_atoms(body).minus({a}))
            if c != a:
                body = _act(Permutation.swap(a, c), body)
            return Abs(c, _canon(body, env, names))
        case Susp(pi, X):
            return var(env.get(X, X), pi)
        case Bot():
            return t
        case Imp(l, r):
            return Imp(_canon(l, env, names), _canon(r, env, names))
        case Pred(P, arg):
            return Pred(P, _canon(arg, env, names))
        case Forall(X, body, hint):
            Y = Unknown(next(names), X.sort, X.pmss)
            return Forall(Y, _canon(body, {**env, X: Y}, names), hint or X.name)
    raise TypeError(f"not PNL syntax: {t!r}")


def alpha_eq(r: Syntax, s: Syntax) -> bool:
    return canon(r) == canon(s)


def fresh_unknown(sort: Sort, pmss: PermissionSet, avoid: Iterable[str], stem: str = "Z") -> Unknown:
    avoid = set(avoid)
    for k in count():
        name = f"{stem}{k}"
        if name not in avoid:
            return Unknown(name, sort, pmss)
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# substitution


class Subst:
    """A finite map from unknowns to terms meeting the permission side conditions.

    With ``check=False`` the side conditions are skipped; the proof elaborator
    uses that to build candidate premises that the checkers then judge.
    """

    def __init__(self, mapping: Mapping, sig: Signature | None = None, check: bool = True):
        self.mapping = {X: canon(r) for X, r in mapping.items() if canon(r) != var(X)}
        if check:
            for X, r in self.mapping.items():
                if sig is not None:
                    got = sort_of(sig, r)
                    if got != X.sort:
                        raise SortError(f"{X.name} has sort {X.sort} but {r} has sort {got}")
                bad = free_atoms(r).counterexample(X.pmss, sort=_name_sort_hint(X.sort))
                if bad is not None:
                    raise PermissionViolation(X, bad)

    def __getitem__(self, X: Unknown) -> Term:
        return self.mapping.get(X, var(X))

    def __contains__(self, X: Unknown) -> bool:
        return X in self.mapping

    def nontriv(self) -> frozenset:
        return frozenset(self.mapping).union(*(free_unknowns(r) for r in self.mapping.values()))

    def __repr__(self) -> str:
        body = ", ".join(f"{X.name}:={r}" for X, r in sorted(self.mapping.items(), key=lambda kv: kv[0].name))
        return f"[{body}]"


def _name_sort_hint(s: Sort) -> str:
    match s:
        case NameSort(n):
            return n
        case AbsSort(n, _):
            return n
        case TupleSort(items) if items:
            return _name_sort_hint(items[0])
    return "nu"


def mk_point_subst(X: Unknown, r: Term, sig: Signature | None = None) -> Subst:
    """``[X:=r]``, refusing it when ``r`` has the wrong sort or too many free atoms."""
    return Subst({X: r}, sig)


def apply_subst(theta: Subst | Mapping, t: Syntax) -> Syntax:
    if not isinstance(theta, Subst):
        theta = Subst(theta, check=False)
    if not theta.mapping:
        return canon(t)
    return canon(_subst(theta.mapping, theta.nontriv(), t))


def _subst(theta: dict, blocked: frozenset, t: Syntax) -> Syntax:
    match t:
        case Atom() | Bot():
            return t
        case Tup(items):
            return Tup(tuple(_subst(theta, blocked, i) for i in items))
        case App(f, arg):
            return App(f, _subst(theta, blocked, arg))
        case Abs(a, body):
            return Abs(a, _subst(theta, blocked, body))
        case Susp(pi, X):
            return _act(pi, theta[X]) if X in theta else t
        case Imp(l, r):
            return Imp(_subst(theta, blocked, l), _subst(theta, blocked, r))
        case Pred(P, arg):
            return Pred(P, _subst(theta, blocked, arg))
        case Forall(X, body, hint):
            if X in blocked:
                avoid = {Y.name for Y in blocked | free_unknowns(body)}
                Y = fresh_unknown(X.sort, X.pmss, avoid, stem="_r")
                body = _act2(unknown_swap(X, Y), body)
                X = Y
            return Forall(X, _subst(theta, blocked, body), hint)
    raise TypeError(f"not PNL syntax: {t!r}")
