"""Atoms and the finite machinery built on them.

Atoms are pairs ``(sort, index)``.  Negative indices are the *down* half of a
sort and non-negative indices the *up* half, so ``a in atoms_down`` is a sign
test.  Permission sets, finitely representable atom sets, permutations,
renamings and freshening pairs all live here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import count
from typing import Iterable, Iterator, Mapping, Union


class AtomError(ValueError):
    """Sort mismatches, malformed permutations, and fresh-atom exhaustion."""


@dataclass(frozen=True, order=True)
class Atom:
    sort: str
    index: int

    @property
    def down(self) -> bool:
        return self.index < 0

    def __str__(self) -> str:
        return f"{self.sort}#{self.index}"

    def __repr__(self) -> str:
        return f"Atom({self})"


def atom(text: str) -> Atom:
    """Parse ``sort#index``."""
    sort, _, idx = text.strip().partition("#")
    if not sort or not idx:
        raise AtomError(f"malformed atom {text!r}")
    return Atom(sort, int(idx))


def _fmt_set(atoms: Iterable[Atom]) -> str:
    return "{" + ", ".join(str(a) for a in sorted(atoms)) + "}"


# ---------------------------------------------------------------------------
# permission sets and atom-set expressions


@dataclass(frozen=True)
class PermissionSet:
    """``(atoms_down | adds) - removes`` with finite ``adds`` (up) and ``removes`` (down)."""

    adds: frozenset = frozenset()
    removes: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "adds", frozenset(self.adds))
        object.__setattr__(self, "removes", frozenset(self.removes))
        if any(a.down for a in self.adds):
            raise AtomError("permission set adds must be up atoms")
        if any(not a.down for a in self.removes):
            raise AtomError("permission set removes must be down atoms")

    def __contains__(self, a: Atom) -> bool:
        return a in self.adds if not a.down else a not in self.removes

    def to_expr(self) -> "AtomSetExpr":
        return AtomSetExpr(True, self.removes, self.adds)

    def __str__(self) -> str:
        return f"perm(+{_fmt_set(self.adds)},-{_fmt_set(self.removes)})"


DOWN = PermissionSet()


@dataclass(frozen=True)
class AtomSetExpr:
    """A finite set, or ``(atoms_down - excluded) | extras``.

    Construction normalises so that ``extras`` never repeats a member of the
    down part; equal sets therefore have equal representations.
    """

    include_down: bool = False
    excluded: frozenset = frozenset()
    extras: frozenset = frozenset()

    def __post_init__(self):
        excl = frozenset(self.excluded)
        extras = frozenset(self.extras)
        if self.include_down:
            if any(not a.down for a in excl):
                raise AtomError("excluded atoms must be down atoms")
            excl = excl - extras
            extras = frozenset(a for a in extras if not a.down)
        else:
            excl = frozenset()
        object.__setattr__(self, "excluded", excl)
        object.__setattr__(self, "extras", extras)

    @staticmethod
    def finite(atoms: Iterable[Atom] = ()) -> "AtomSetExpr":
        return AtomSetExpr(False, frozenset(), frozenset(atoms))

    @property
    def is_finite(self) -> bool:
        return not self.include_down

    def atoms(self) -> frozenset:
        if self.include_down:
            raise AtomError("infinite atom set has no finite enumeration")
        return self.extras

    def __contains__(self, a: Atom) -> bool:
        if a in self.extras:
            return True
        return self.include_down and a.down and a not in self.excluded

    def union(self, other: "AtomSetExprLike") -> "AtomSetExpr":
        other = as_expr(other)
        if not self.include_down and not other.include_down:
            return AtomSetExpr.finite(self.extras | other.extras)
        if self.include_down and other.include_down:
            excl = self.excluded & other.excluded
        else:
            inf, fin = (self, other) if self.include_down else (other, self)
            excl = inf.excluded - fin.extras
        return AtomSetExpr(True, excl, self.extras | other.extras)

    def minus(self, atoms: Iterable[Atom]) -> "AtomSetExpr":
        atoms = frozenset(atoms)
        if not self.include_down:
            return AtomSetExpr.finite(self.extras - atoms)
        return AtomSetExpr(
            True,
            self.excluded | {a for a in atoms if a.down},
            self.extras - atoms,
        )

    def meet(self, atoms: Iterable[Atom]) -> frozenset:
        """Intersection with a finite set (always finite)."""
        return frozenset(a for a in atoms if a in self)

    def issubset(self, other: "AtomSetExprLike") -> bool:
        return self.counterexample(other) is None

    def counterexample(self, other: "AtomSetExprLike", sort: str = "nu") -> Atom | None:
        """Some atom in ``self`` but not in ``other``, or None when ``self <= other``."""
        other = as_expr(other)
        for a in sorted(self.extras):
            if a not in other:
                return a
        if not self.include_down:
            return None
        if other.include_down:
            missing = other.excluded - self.excluded
            return min(missing, key=_magnitude) if missing else None
        sorts = {a.sort for a in self.excluded | self.extras | other.extras} or {sort}
        s = sort if sort in sorts else min(sorts)
        for i in count(1):
            a = Atom(s, -i)
            if a in self and a not in other:
                return a

    def perm_image(self, pi: "Permutation") -> "AtomSetExpr":
        moved = pi.nontriv()
        inside = self.meet(moved)
        return self.minus(moved).union(AtomSetExpr.finite(pi(a) for a in inside))

    def ren_image(self, rho: "Renaming") -> "AtomSetExpr":
        moved = rho.dom()
        inside = self.meet(moved)
        return self.minus(moved).union(AtomSetExpr.finite(rho(a) for a in inside))

    def __str__(self) -> str:
        if not self.include_down:
            return _fmt_set(self.extras)
        return f"(down-{_fmt_set(self.excluded)})|{_fmt_set(self.extras)}"


AtomSetExprLike = Union[AtomSetExpr, PermissionSet, frozenset, set]


def as_expr(s: AtomSetExprLike) -> AtomSetExpr:
    if isinstance(s, AtomSetExpr):
        return s
    if isinstance(s, PermissionSet):
        return s.to_expr()
    return AtomSetExpr.finite(s)


EMPTY = AtomSetExpr.finite()


def _magnitude(a: Atom) -> tuple:
    return (abs(a.index), a.sort)


def fresh_atom(sort: str, avoid: AtomSetExprLike, want_down: bool = False) -> Atom:
    """Smallest-magnitude atom of ``sort`` and the requested polarity outside ``avoid``."""
    avoid = as_expr(avoid)
    if want_down:
        if avoid.include_down:
            free = [a for a in avoid.excluded if a.sort == sort and a not in avoid]
            if not free:
                raise AtomError(f"no down atom of sort {sort} lies outside {avoid}")
            return min(free, key=_magnitude)
        indices = count(-1, -1)
    else:
        indices = count(0)
    for i in indices:
        a = Atom(sort, i)
        if a not in avoid:
            return a
    raise AssertionError("unreachable")


def fresh_atoms(sort: str, avoid: AtomSetExprLike, n: int, want_down: bool = False) -> list:
    out: list[Atom] = []
    avoid = as_expr(avoid)
    for _ in range(n):
        a = fresh_atom(sort, avoid, want_down)
        out.append(a)
        avoid = avoid.union({a})
    return out


# ---------------------------------------------------------------------------
# permutations and renamings


def _table(pairs) -> dict:
    if isinstance(pairs, Mapping):
        pairs = pairs.items()
    return {a: b for a, b in pairs if a != b}


@dataclass(frozen=True)
class Permutation:
    """A finite sort-preserving bijection, stored as its non-trivial graph."""

    pairs: frozenset = frozenset()
    _map: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        table = _table(self.pairs)
        if set(table) != set(table.values()):
            raise AtomError("permutation is not a bijection on its support")
        for a, b in table.items():
            if a.sort != b.sort:
                raise AtomError(f"permutation maps {a} to {b} across sorts")
        object.__setattr__(self, "pairs", frozenset(table.items()))
        object.__setattr__(self, "_map", table)

    @staticmethod
    def identity() -> "Permutation":
        return ID

    @staticmethod
    def swap(a: Atom, b: Atom) -> "Permutation":
        if a.sort != b.sort:
            raise AtomError(f"cannot swap {a} and {b}: sorts differ")
        return Permutation({a: b, b: a})

    @staticmethod
    def from_cycles(cycles: Iterable[Iterable[Atom]]) -> "Permutation":
        pi = ID
        for cyc in cycles:
            cyc = list(cyc)
            if len(set(cyc)) != len(cyc):
                raise AtomError("repeated atom in cycle")
            table = {cyc[i]: cyc[(i + 1) % len(cyc)] for i in range(len(cyc))}
            pi = pi.compose(Permutation(table))
        return pi

    def __call__(self, a: Atom) -> Atom:
        return self._map.get(a, a)

    def nontriv(self) -> frozenset:
        return frozenset(self._map)

    def is_identity(self) -> bool:
        return not self._map

    def compose(self, other: "Permutation") -> "Permutation":
        """``(self o other)(a) = self(other(a))``."""
        keys = self.nontriv() | other.nontriv()
        return Permutation({a: self(other(a)) for a in keys})

    def inverse(self) -> "Permutation":
        return Permutation({b: a for a, b in self._map.items()})

    def as_renaming(self) -> "Renaming":
        return Renaming(self._map)

    @staticmethod
    def extending(part: Mapping) -> "Permutation":
        """The least permutation extending the partial injection ``part``.

        Open chains ``a -> ... -> z`` with ``z`` outside the domain are closed
        by sending ``z`` back to the chain's start.
        """
        part = dict(part)
        if len(set(part.values())) != len(part):
            raise AtomError("partial map is not injective")
        table = dict(part)
        targets = set(part.values())
        for start in part:
            if start in targets:
                continue
            end = start
            while end in part:
                end = part[end]
            table[end] = start
        return Permutation(table)

    def restrict(self, keep) -> "Permutation":
        """The least permutation agreeing with ``self`` on ``{a in nontriv | keep(a)}``."""
        return Permutation.extending({a: b for a, b in self._map.items() if keep(a)})

    def cycles(self) -> list:
        seen: set = set()
        out = []
        for a in sorted(self._map):
            if a in seen:
                continue
            cyc = [a]
            seen.add(a)
            b = self(a)
            while b != a:
                cyc.append(b)
                seen.add(b)
                b = self(b)
            out.append(tuple(cyc))
        return out

    def __str__(self) -> str:
        return "(" + "".join("(" + " ".join(map(str, c)) + ")" for c in self.cycles()) + ")"

    def __repr__(self) -> str:
        return f"Permutation{self}"


ID = Permutation()


@dataclass(frozen=True)
class Renaming:
    """A finite sort-preserving map on atoms, stored as the graph on ``dom``."""

    pairs: frozenset = frozenset()
    _map: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        table = _table(self.pairs)
        for a, b in table.items():
            if a.sort != b.sort:
                raise AtomError(f"renaming maps {a} to {b} across sorts")
        object.__setattr__(self, "pairs", frozenset(table.items()))
        object.__setattr__(self, "_map", table)

    @staticmethod
    def identity() -> "Renaming":
        return ID_REN

    @staticmethod
    def atomic(a: Atom, b: Atom) -> "Renaming":
        """``[a->b]``: a goes to b, everything else (b included) stays put."""
        if a.sort != b.sort:
            raise AtomError(f"cannot rename {a} to {b}: sorts differ")
        return Renaming({a: b})

    def __call__(self, a: Atom) -> Atom:
        return self._map.get(a, a)

    def dom(self) -> frozenset:
        return frozenset(self._map)

    def img(self) -> frozenset:
        return frozenset(self._map.values())

    def nontriv(self) -> frozenset:
        return self.dom() | self.img()

    def is_identity(self) -> bool:
        return not self._map

    def compose(self, other: "Renaming") -> "Renaming":
        keys = self.dom() | other.dom()
        return Renaming({a: self(other(a)) for a in keys})

    def restrict(self, atoms: Iterable[Atom]) -> "Renaming":
        atoms = set(atoms)
        return Renaming({a: b for a, b in self._map.items() if a in atoms})

    def items(self) -> Iterator:
        return iter(sorted(self._map.items()))

    def __str__(self) -> str:
        return "[" + ", ".join(f"{a}->{b}" for a, b in self.items()) + "]"

    def __repr__(self) -> str:
        return f"Renaming{self}"


ID_REN = Renaming()


def as_renaming(x: Union[Permutation, Renaming]) -> Renaming:
    return x.as_renaming() if isinstance(x, Permutation) else x


@dataclass(frozen=True)
class FresheningPair:
    rho1: Renaming
    rho2: Renaming
    avoid: AtomSetExpr


def make_freshening_pair(A: Iterable[Atom], avoid: AtomSetExprLike) -> FresheningPair:
    """Send each atom of ``A`` somewhere outside ``avoid`` and ``A``, and back again."""
    A = frozenset(A)
    avoid = as_expr(avoid)
    blocked = avoid.union(A)
    out, back = {}, {}
    for a in sorted(A):
        c = fresh_atom(a.sort, blocked)
        blocked = blocked.union({c})
        out[a], back[c] = c, a
    pair = FresheningPair(Renaming(out), Renaming(back), avoid)
    r1, r2 = pair.rho1, pair.rho2
    assert r1.dom() == A
    assert r2.dom() == r1.img()
    assert all(r2(r1(a)) == a for a in A)
    assert not any(c in avoid or c in A for c in r2.dom())
    return pair
