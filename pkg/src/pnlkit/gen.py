"""Enumerators and random generators over small signatures.

The bounded enumeration drives exhaustive property checks; the random
generators drive the sampled ones.  Everything is deterministic given a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import permutations, product

from .atoms import Atom, PermissionSet, Permutation, atom
from .nomsem import VAbs, VAtom, VCon, VTuple, default_value, support
from .syntax import (
    Abs,
    AbsSort,
    App,
    BaseSort,
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
    BOT,
    free_atoms,
)
from .text import parse_signature

LAMBDA_SIG_TEXT = """\
atomsort nu
basesort iota
termformer var : (nu) iota
termformer app : (iota, iota) iota
termformer lam : ([nu]iota) iota
propformer eq : (iota, iota)
"""

NU = NameSort("nu")
IOTA = BaseSort("iota")
ABS = AbsSort("nu", IOTA)
PAIR = TupleSort((IOTA, IOTA))

ATOMS4 = (atom("nu#-2"), atom("nu#-1"), atom("nu#0"), atom("nu#1"))


def lambda_signature() -> Signature:
    return parse_signature(LAMBDA_SIG_TEXT)


def depth(t) -> int:
    """Atoms and moderated unknowns have depth 1; every constructor, tuples included, adds one."""
    match t:
        case Atom() | Susp():
            return 1
        case Tup(items):
            return 1 + max((depth(i) for i in items), default=0)
        case App(_, arg):
            return 1 + depth(arg)
        case Abs(_, body):
            return 1 + depth(body)
    raise TypeError(f"not a term: {t!r}")


@dataclass
class Universe:
    """The finite setting of the exhaustive checks."""

    atoms: tuple = ATOMS4
    unknowns: tuple = ()
    sig: Signature = field(default_factory=lambda_signature)

    def perms(self) -> list:
        return [Permutation(dict(zip(self.atoms, img))) for img in permutations(self.atoms)]


def standard_universe() -> Universe:
    X = Unknown("X", IOTA)
    Y = Unknown("Y", IOTA, PermissionSet(adds={atom("nu#0")}, removes={atom("nu#-1")}))
    return Universe(ATOMS4, (X, Y))


def enumerate_terms(u: Universe, max_depth: int = 3) -> dict:
    """Every raw term of depth at most ``max_depth``, grouped by sort.

    Suspensions carry every permutation of the universe's atoms, unrestricted,
    so alpha-equivalence on moderated unknowns is exercised as well.
    """
    perms = u.perms()
    by: dict = {}

    def level(d):
        out = {NU: [], IOTA: [], ABS: [], PAIR: []}
        if d >= 1:
            out[NU] = list(u.atoms)
            out[IOTA] += [Susp(p, X) for X in u.unknowns for p in perms]
        if d >= 2:
            prev = by[d - 1]
            out[IOTA] += [App("var", a) for a in prev[NU]]
            out[ABS] = [Abs(a, r) for a in u.atoms for r in prev[IOTA]]
            out[PAIR] = [Tup((r, s)) for r, s in product(prev[IOTA], repeat=2)]
            out[IOTA] += [App("app", t) for t in prev[PAIR]]
            out[IOTA] += [App("lam", t) for t in prev[ABS]]
        return out

    for d in range(1, max_depth + 1):
        by[d] = level(d)
    return by[max_depth]


# ---------------------------------------------------------------------------
# random syntax


@dataclass
class TermGen:
    """Random sort-correct terms and propositions over a signature."""

    sig: Signature
    rng: random.Random
    atoms: tuple = ATOMS4
    unknowns: tuple = ()

    def perm(self) -> Permutation:
        if self.rng.random() < 0.4:
            return Permutation()
        img = list(self.atoms)
        self.rng.shuffle(img)
        return Permutation(dict(zip(self.atoms, img)))

    def term(self, s: Sort, depth: int, fa_within: PermissionSet | None = None):
        """A term of sort ``s``; with ``fa_within``, its free atoms stay inside that set."""
        rng = self.rng
        match s:
            case NameSort(n):
                pool = [a for a in self.atoms if a.sort == n and (fa_within is None or a in fa_within)]
                return rng.choice(pool or [a for a in self.atoms if a.sort == n])
            case TupleSort(items):
                return Tup(tuple(self.term(i, depth - 1, fa_within) for i in items))
            case AbsSort(nu, body):
                a = rng.choice([a for a in self.atoms if a.sort == nu])
                inner = fa_within
                if fa_within is not None:
                    inner = PermissionSet(fa_within.adds | ({a} if not a.down else set()),
                                          fa_within.removes - {a})
                return Abs(a, self.term(body, depth - 1, inner))
            case BaseSort(n):
                Xs = [X for X in self.unknowns if X.sort == s]
                formers = [f for f, (_, res) in sorted(self.sig.term_formers.items()) if res == n]
                if Xs and (depth <= 1 or rng.random() < 0.3):
                    for _ in range(20):
                        X = rng.choice(Xs)
                        t = Susp(self.perm().restrict(lambda a: a in X.pmss), X)
                        if fa_within is None or _fa_ok(t, fa_within):
                            return t
                if depth <= 1:
                    formers = [f for f in formers if isinstance(self.sig.term_formers[f][0], NameSort)] or formers
                f = rng.choice(formers)
                return App(f, self.term(self.sig.term_formers[f][0], depth - 1, fa_within))
        raise TypeError(f"not a sort: {s!r}")

    def prop(self, depth: int, quantifiers: bool = False, bound: tuple = ()):
        rng = self.rng
        r = rng.random()
        if depth <= 1 or r < 0.45:
            if rng.random() < 0.08:
                return BOT
            P = rng.choice(sorted(self.sig.prop_formers))
            return Pred(P, self.term(self.sig.prop_formers[P], 3))
        if quantifiers and r < 0.65 and self.unknowns:
            X = rng.choice(self.unknowns)
            return Forall(X, self.prop(depth - 1, quantifiers))
        return Imp(self.prop(depth - 1, quantifiers), self.prop(depth - 1, quantifiers))


def _fa_ok(t, S: PermissionSet) -> bool:
    return free_atoms(t).issubset(S)


@dataclass
class ValueGen:
    """Random ground values of a sort with support inside a permission set."""

    sig: Signature
    rng: random.Random
    atoms: tuple = ATOMS4

    def value(self, s: Sort, depth: int, pmss: PermissionSet | None = None):
        rng = self.rng
        match s:
            case NameSort(n):
                pool = [a for a in self.atoms if a.sort == n and (pmss is None or a in pmss)]
                if not pool:
                    return default_value(self.sig, s, pmss)
                return VAtom(rng.choice(pool))
            case TupleSort(items):
                return VTuple(tuple(self.value(i, depth - 1, pmss) for i in items))
            case AbsSort(nu, body):
                a = rng.choice([a for a in self.atoms if a.sort == nu])
                inner = pmss
                if pmss is not None:
                    inner = PermissionSet(pmss.adds | ({a} if not a.down else set()), pmss.removes - {a})
                v = VAbs(a, self.value(body, depth - 1, inner))
                return v
            case BaseSort(n):
                formers = [f for f, (_, res) in sorted(self.sig.term_formers.items()) if res == n]
                if depth <= 1:
                    formers = [f for f in formers if isinstance(self.sig.term_formers[f][0], NameSort)] or formers
                f = rng.choice(formers)
                v = VCon(f, self.value(self.sig.term_formers[f][0], depth - 1, pmss))
                if pmss is not None and not all(a in pmss for a in support(v)):
                    return default_value(self.sig, s, pmss)
                return v
        raise TypeError(f"not a sort: {s!r}")
