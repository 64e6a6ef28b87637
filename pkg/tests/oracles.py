"""Brute-force oracles used to cross-check the library.

Each oracle works from the raw definitions and keeps its own copies of free
atoms, swapping and renaming, so that agreement with the library means
something.  They only ever run on small finite universes.
"""

from __future__ import annotations

from itertools import permutations, product

from pnlkit.atoms import Atom, Permutation, Renaming
from pnlkit.nomsem import VAtom, VCon, VTuple
from pnlkit.syntax import Abs, App, Susp, Tup


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, x, y):
        rx, ry = self.find(x), self.find(y)
        if rx != ry:
            self.parent[rx] = ry

    def classes(self) -> list:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return list(out.values())


def compare_partitions(classes: list, key) -> list:
    """Disagreements between an oracle partition and the classes induced by ``key``.

    Returns a list of (left, right) pairs: either two members of one oracle class
    with different keys, or two oracle classes sharing a key.
    """
    bad = []
    owner: dict = {}
    for cls in classes:
        keys = {}
        for x in cls:
            keys.setdefault(key(x), x)
        if len(keys) > 1:
            a, b = list(keys.values())[:2]
            bad.append((a, b))
        for k, x in keys.items():
            if k in owner and owner[k] is not cls:
                bad.append((owner[k][0], x))
            owner[k] = cls
    return bad


# ---------------------------------------------------------------------------
# alpha-equivalence as the least congruence generated by (b a).r ~ r


def _pmss_has(X, a: Atom) -> bool:
    p = X.pmss
    if a.index < 0:
        return a not in p.removes
    return a in p.adds


def in_fa(t, a: Atom) -> bool:
    """Is ``a`` free in the raw term ``t``?  Read off the defining clauses."""
    if isinstance(t, Atom):
        return t == a
    if isinstance(t, Tup):
        return any(in_fa(i, a) for i in t.items)
    if isinstance(t, App):
        return in_fa(t.arg, a)
    if isinstance(t, Abs):
        return t.atom != a and in_fa(t.body, a)
    if isinstance(t, Susp):
        inv = {v: k for k, v in t.pi.pairs}
        return _pmss_has(t.unknown, inv.get(a, a))
    raise TypeError(t)


def raw_swap(a: Atom, b: Atom, t):
    """The level-1 action of the swap (a b), done on raw syntax."""
    sw = lambda c: b if c == a else a if c == b else c
    if isinstance(t, Atom):
        return sw(t)
    if isinstance(t, Tup):
        return Tup(tuple(raw_swap(a, b, i) for i in t.items))
    if isinstance(t, App):
        return App(t.former, raw_swap(a, b, t.arg))
    if isinstance(t, Abs):
        return Abs(sw(t.atom), raw_swap(a, b, t.body))
    if isinstance(t, Susp):
        m = dict(t.pi.pairs)
        composed = {c: sw(m.get(c, c)) for c in set(m) | {a, b}}
        return Susp(Permutation(composed), t.unknown)
    raise TypeError(t)


def _rebuild(t, path, new):
    if not path:
        return new
    i, rest = path[0], path[1:]
    if isinstance(t, Tup):
        items = list(t.items)
        items[i] = _rebuild(items[i], rest, new)
        return Tup(tuple(items))
    if isinstance(t, App):
        return App(t.former, _rebuild(t.arg, rest, new))
    if isinstance(t, Abs):
        return Abs(t.atom, _rebuild(t.body, rest, new))
    raise TypeError(t)


def _positions(t, path=()):
    yield path, t
    if isinstance(t, Tup):
        for i, x in enumerate(t.items):
            yield from _positions(x, path + (i,))
    elif isinstance(t, (App, Abs)):
        sub = t.arg if isinstance(t, App) else t.body
        yield from _positions(sub, path + (0,))


def alpha_closure(terms, atoms) -> UnionFind:
    """Close a finite set of raw terms under the generating rule applied at any position."""
    universe = set(terms)
    uf = UnionFind(universe)
    pairs = [(a, b) for a, b in product(atoms, repeat=2) if a < b and a.sort == b.sort]
    for t in universe:
        for path, s in _positions(t):
            for a, b in pairs:
                if in_fa(s, a) or in_fa(s, b):
                    continue
                u = _rebuild(t, path, raw_swap(a, b, s))
                if u in universe:
                    uf.union(t, u)
    return uf


# ---------------------------------------------------------------------------
# Ren(-): the two generating rules, closed over a finite atom universe


def ren_nodes(atoms, max_len: int = 3):
    """Nodes (graph, value): value an atom or a tuple of atoms, graph a map on its support."""
    values = [VAtom(a) for a in atoms]
    for n in range(2, max_len + 1):
        values += [VTuple(tuple(VAtom(a) for a in combo)) for combo in product(atoms, repeat=n)]
    nodes = []
    for v in values:
        supp = sorted(_vsupp(v))
        for img in product(atoms, repeat=len(supp)):
            nodes.append((frozenset(zip(supp, img)), v))
    return nodes


def _vsupp(v) -> frozenset:
    """Support of an abstraction-free value."""
    if isinstance(v, VAtom):
        return frozenset({v.atom})
    if isinstance(v, VCon):
        return _vsupp(v.arg)
    return frozenset().union(*(_vsupp(i) for i in v.items))


def _vswap(a, b, v):
    if isinstance(v, VAtom):
        c = v.atom
        return VAtom(b if c == a else a if c == b else c)
    if isinstance(v, VCon):
        return VCon(v.former, _vswap(a, b, v.arg))
    return VTuple(tuple(_vswap(a, b, i) for i in v.items))


def ren_closure(atoms, max_len: int = 3) -> UnionFind:
    """Rule 1 is built into the nodes (only the graph on the support is kept);
    rule 2 relates (h, y) with (h . pi, pi . y) for every swap pi."""
    nodes = ren_nodes(atoms, max_len)
    uf = UnionFind(nodes)
    universe = set(nodes)
    for g, y in nodes:
        h = dict(g)
        for a, b in product(atoms, repeat=2):
            if not a < b:
                continue
            sw = lambda c: b if c == a else a if c == b else c
            x = _vswap(a, b, y)
            g2 = frozenset((c, h[sw(c)]) for c in _vsupp(x))
            node = (g2, x)
            assert node in universe
            uf.union((g, y), node)
    return uf


def node_renaming(g) -> Renaming:
    return Renaming(dict(g))


# ---------------------------------------------------------------------------
# atoms-abstraction as a partial function on fresh atoms


def abs_graph(atom_: Atom, body, probe) -> dict:
    """The graph c |-> (c a).x of [a]x at the probe atoms fresh for it; ``body`` is abstraction-free."""
    free = _vsupp(body) - {atom_}
    return {c: _vswap(c, atom_, body) for c in probe if c not in free}


def all_permutations(atoms) -> list:
    return [Permutation(dict(zip(atoms, img))) for img in permutations(atoms)]
