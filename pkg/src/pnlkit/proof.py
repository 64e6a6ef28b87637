"""Sequents, derivation trees, and the full and restricted PNL checkers.

A derivation is an explicit tree.  Each node names its rule and carries its
conclusion; the checker confirms that the premises' conclusions are exactly
what the rule demands.  Contexts are sets of canonical propositions, so the
``phi, Phi`` of a rule may or may not still contain ``phi`` and both readings
are accepted.

Derivation files are s-expressions (see :func:`elaborate`), with premise
sequents worked out from the end sequent unless a node pins its own with
``:seq``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import sexpr
from .atoms import ID, Permutation
from .sexpr import Sym, split_node
from .syntax import (
    Bot,
    Forall,
    Imp,
    Prop,
    Signature,
    SortError,
    Subst,
    Term,
    Unknown,
    apply_subst,
    canon,
    check_prop,
    free_atoms,
    free_atoms_of,
    free_unknowns,
    free_unknowns_of,
    permute,
    sort_of,
    var,
)
from .text import ParseError, parse_permutation, parse_prop, parse_term, show


class DerivationError(ValueError):
    """A derivation file that cannot be elaborated into a tree."""


# ---------------------------------------------------------------------------
# sequents and rules


def _sorted(props: Iterable[Prop]) -> list:
    return sorted(props, key=show)


@dataclass(frozen=True)
class Sequent:
    left: frozenset
    right: frozenset

    @staticmethod
    def of(left: Iterable[Prop] = (), right: Iterable[Prop] = ()) -> "Sequent":
        return Sequent(frozenset(map(canon, left)), frozenset(map(canon, right)))

    def props(self) -> frozenset:
        return self.left | self.right

    def __str__(self) -> str:
        l = ", ".join(show(p) for p in _sorted(self.left))
        r = ", ".join(show(p) for p in _sorted(self.right))
        return f"{l} |- {r}".strip()


@dataclass(frozen=True)
class Ax:
    """``Phi, phi |- pi.phi, Psi``; restricted PNL only admits ``pi = id``."""

    pi: Permutation = ID


@dataclass(frozen=True)
class AxR:
    pass


@dataclass(frozen=True)
class BotL:
    pass


@dataclass(frozen=True)
class ImpL:
    pass


@dataclass(frozen=True)
class ImpR:
    pass


@dataclass(frozen=True)
class ForallL:
    """Instantiate a left universal whose binder has the sort and permissions of ``unknown``."""

    unknown: Unknown
    witness: Term


@dataclass(frozen=True)
class ForallR:
    """Generalise a right universal using the eigen-unknown ``unknown``."""

    unknown: Unknown


Rule = Ax | AxR | BotL | ImpL | ImpR | ForallL | ForallR

ARITY = {Ax: 0, AxR: 0, BotL: 0, ImpL: 2, ImpR: 1, ForallL: 1, ForallR: 1}


def rule_name(rule) -> str:
    return type(rule).__name__


@dataclass(frozen=True)
class Derivation:
    conclusion: Sequent
    rule: Rule
    premises: tuple = ()

    def nodes(self, path: str = "0") -> Iterator[tuple]:
        """Pre-order ``(path, node)`` pairs; children of ``p`` are ``p.0``, ``p.1``."""
        yield path, self
        for i, p in enumerate(self.premises):
            yield from p.nodes(f"{path}.{i}")

    def sequents(self) -> list:
        return [n.conclusion for _, n in self.nodes()]


# ---------------------------------------------------------------------------
# reports


@dataclass
class NodeReport:
    path: str
    rule: str
    ok: bool
    message: str = ""

    def to_dict(self) -> dict:
        return {"path": self.path, "rule": self.rule, "ok": self.ok, "message": self.message}


@dataclass
class CheckReport:
    ok: bool
    nodes: list = field(default_factory=list)

    def failures(self) -> list:
        return [n for n in self.nodes if not n.ok]

    def to_dict(self) -> dict:
        return {"ok": self.ok, "nodes": [n.to_dict() for n in self.nodes]}

    def __str__(self) -> str:
        lines = ["accepted" if self.ok else "rejected"]
        for n in self.nodes:
            status = "ok  " if n.ok else "FAIL"
            lines.append(f"  {status} {n.path} {n.rule}" + (f": {n.message}" if n.message else ""))
        return "\n".join(lines)


def _variants(ctx: frozenset, principal) -> tuple:
    return (ctx - {principal}, ctx)


def _showset(props) -> str:
    return "{" + ", ".join(show(p) for p in _sorted(props)) + "}"


# ---------------------------------------------------------------------------
# checking


def check_full(sig: Signature, d: Derivation) -> CheckReport:
    return _check(sig, d, restricted=False)


def check_restricted(sig: Signature, d: Derivation) -> CheckReport:
    return _check(sig, d, restricted=True)


def _check(sig: Signature, d: Derivation, restricted: bool) -> CheckReport:
    nodes = []
    for path, node in d.nodes():
        msg = _check_node(sig, node, restricted)
        nodes.append(NodeReport(path, rule_name(node.rule), not msg, msg))
    return CheckReport(all(n.ok for n in nodes), nodes)


def _check_node(sig: Signature, node: Derivation, restricted: bool) -> str:
    seq, rule, prem = node.conclusion, node.rule, node.premises
    for p in seq.props():
        try:
            check_prop(sig, p)
        except SortError as e:
            return f"ill-sorted proposition {show(p)}: {e}"
    if type(rule) not in ARITY:
        return f"unknown rule {rule!r}"
    if len(prem) != ARITY[type(rule)]:
        return f"{rule_name(rule)} needs {ARITY[type(rule)]} premise(s), got {len(prem)}"
    L, R = seq.left, seq.right
    concl = [p.conclusion for p in prem]
    match rule:
        case Ax(pi):
            if restricted and not pi.is_identity():
                return f"non-identity axiom permutation {pi} is not allowed in restricted PNL"
            if any(permute(pi, phi) in R for phi in L):
                return ""
            how = "" if pi.is_identity() else f" after applying {pi}"
            return f"no left formula appears on the right{how}"
        case AxR():
            return "" if L & R else "no formula appears on both sides"
        case BotL():
            return "" if Bot() in L else "bot is not on the left"
        case ImpL():
            return _check_impl(L, R, concl)
        case ImpR():
            return _check_impr(L, R, concl[0])
        case ForallL(X, r):
            return _check_foralll(sig, L, R, X, r, concl[0])
        case ForallR(X):
            return _check_forallr(L, R, X, concl[0])
    return f"unknown rule {rule!r}"


def _check_impl(L, R, concl) -> str:
    cands = [p for p in L if isinstance(p, Imp)]
    if not cands:
        return "no implication on the left"
    p1, p2 = concl
    for p in cands:
        for phi in _variants(L, p):
            if p1 == Sequent(phi, R | {p.left}) and p2 == Sequent(phi | {p.right}, R):
                return ""
    return "premises do not match ImpL for any left implication"


def _check_impr(L, R, concl) -> str:
    cands = [p for p in R if isinstance(p, Imp)]
    if not cands:
        return "no implication on the right"
    for p in cands:
        for psi in _variants(R, p):
            if concl == Sequent(L | {p.left}, psi | {p.right}):
                return ""
    return "premise does not match ImpR for any right implication"


def _matching_forall(ctx, X: Unknown | None) -> list:
    return [p for p in _sorted(ctx) if isinstance(p, Forall)
            and (X is None or (p.unknown.sort == X.sort and p.unknown.pmss == X.pmss))]


def instantiate(p: Forall, r: Term, check: bool = False, sig: Signature | None = None) -> Prop:
    """``phi[X:=r]`` for ``p = forall X. phi``."""
    return apply_subst(Subst({p.unknown: r}, sig, check=check), p.body)


def _check_foralll(sig, L, R, X, r, concl) -> str:
    cands = _matching_forall(L, X)
    if not cands:
        return f"no universal over {X.sort}#{X.pmss} on the left"
    r = canon(r)
    try:
        got = sort_of(sig, r)
    except SortError as e:
        return f"ill-sorted witness {show(r)}: {e}"
    if got != X.sort:
        return f"witness {show(r)} has sort {got}, expected {X.sort}"
    bad = free_atoms(r).counterexample(X.pmss)
    if bad is not None:
        return f"witness {show(r)} has free atom {bad} outside the permission set {X.pmss}"
    for p in cands:
        inst = instantiate(p, r)
        for phi in _variants(L, p):
            if concl == Sequent(phi | {inst}, R):
                return ""
    return f"premise is not an instance at witness {show(r)} of any matching left universal"


def _check_forallr(L, R, X, concl) -> str:
    cands = _matching_forall(R, X)
    if not cands:
        return f"no universal over {X.sort}#{X.pmss} on the right"
    reasons = []
    for p in cands:
        if X in free_unknowns(p):
            reasons.append(f"eigen-unknown {X.name} is free in {show(p)}")
            continue
        inst = apply_subst(Subst({p.unknown: var(X)}, check=False), p.body)
        for psi in _variants(R, p):
            clash = free_unknowns_of(L | psi)
            if X in clash:
                reasons.append(f"eigen-unknown {X.name} is free in the context")
                continue
            if concl == Sequent(L, psi | {inst}):
                return ""
            reasons.append("premise does not match")
    return reasons[0] if len(set(reasons)) == 1 else "; ".join(sorted(set(reasons)))


# ---------------------------------------------------------------------------
# the free-atom lint


@dataclass
class LintReport:
    ok: bool
    offending: list = field(default_factory=list)  # (path, sequent, witness atom)


def fa_restriction_lint(d: Derivation) -> LintReport:
    """Do all sequents keep their free atoms inside those of the end sequent?"""
    end = free_atoms_of(d.conclusion.props())
    bad = []
    for path, node in d.nodes():
        here = free_atoms_of(node.conclusion.props())
        a = here.counterexample(end)
        if a is not None:
            bad.append((path, node.conclusion, a))
    return LintReport(not bad, bad)


# ---------------------------------------------------------------------------
# derivation files


def parse_sequent(sig: Signature, node, env: dict | None = None) -> Sequent:
    tag, _, sides = split_node(node)
    if tag != "sequent":
        raise DerivationError(f"expected (sequent ...), got ({tag} ...)")
    left, right = [], []
    for side in sides:
        stag, _, items = split_node(side)
        if stag not in ("left", "right"):
            raise DerivationError(f"expected (left ...) or (right ...), got ({stag} ...)")
        out = left if stag == "left" else right
        for item in items:
            out.append(_prop_item(sig, item, env))
    return Sequent.of(left, right)


def _prop_item(sig: Signature, item, env: dict | None = None) -> Prop:
    if isinstance(item, list):
        tag, _, args = split_node(item)
        if tag != "axiom" or len(args) != 1:
            raise DerivationError("expected a proposition string or (axiom NAME)")
        name = str(args[0])
        if name not in sig.axioms:
            raise DerivationError(f"no axiom named {name}")
        return sig.axioms[name]
    if isinstance(item, Sym):
        raise DerivationError(f"propositions must be quoted strings, got {item}")
    return parse_prop(item, sig, env)


def load_derivation(sig: Signature, text: str) -> Derivation:
    try:
        tree = sexpr.loads(text)
    except sexpr.SexprError as e:
        raise DerivationError(str(e)) from e
    return elaborate(sig, tree)


def elaborate(sig: Signature, tree) -> Derivation:
    """Turn ``(derivation (sequent ...) NODE)`` into a :class:`Derivation`.

    Rule nodes::

        (ax)                       identity axiom
        (ax :perm "((a b))")       full-PNL axiom with a permutation
        (botL)
        (impL [:on "phi => psi"] P1 P2)
        (impR [:on "phi => psi"] P)
        (forallL :witness "r" [:X NAME] [:on "forall ..."] P)
        (forallR :X NAME [:on "forall ..."] P)

    ``:X`` on ``forallL`` selects the universal whose binder was written with
    that name.  Any node may carry ``:seq (sequent ...)`` to fix its
    conclusion explicitly.  Side conditions are not checked here.
    """
    try:
        tag, _, parts = split_node(tree)
        if tag != "derivation" or len(parts) != 2:
            raise DerivationError("expected (derivation (sequent ...) NODE)")
        return _elab(sig, parse_sequent(sig, parts[0]), parts[1], {})
    except (ParseError, sexpr.SexprError) as e:
        raise DerivationError(str(e)) from e


def _pick(cands: list, what: str, seq: Sequent):
    if not cands:
        raise DerivationError(f"no {what} in {seq}")
    if len(cands) > 1:
        raise DerivationError(f"several candidates for {what} in {seq}; disambiguate with :on")
    return cands[0]


def _principal(sig, kw, ctx, kind, what, seq, env, X_hint=None):
    if "on" in kw:
        p = parse_prop(kw["on"], sig, env)
        if p not in ctx:
            raise DerivationError(f"{show(p)} is not in the context of {seq}")
        return p
    cands = [p for p in _sorted(ctx) if isinstance(p, kind)]
    if X_hint is not None:
        cands = [p for p in cands if p.hint == X_hint]
    return _pick(cands, what, seq)


def _elab(sig: Signature, seq: Sequent, node, env: dict) -> Derivation:
    tag, kw, kids = split_node(node)
    if "seq" in kw:
        seq = parse_sequent(sig, kw["seq"], env)
    L, R = seq.left, seq.right
    # unknowns free in the current sequent can be named in witnesses
    env = {**env, **{X.name: X for X in free_unknowns_of(seq.props())}}

    def sub(i, s):
        if i >= len(kids):
            raise DerivationError(f"{tag} is missing premise {i + 1}")
        return _elab(sig, s, kids[i], env)

    if tag in ("ax", "axR"):
        rule = Ax(parse_permutation(kw["perm"])) if "perm" in kw else AxR()
        return Derivation(seq, rule, ())
    if tag == "botL":
        return Derivation(seq, BotL(), ())
    if tag == "impL":
        p = _principal(sig, kw, L, Imp, "left implication", seq, env)
        p1 = sub(0, Sequent(L, R | {p.left}))
        p2 = sub(1, Sequent(L | {p.right}, R))
        return Derivation(seq, ImpL(), (p1, p2))
    if tag == "impR":
        p = _principal(sig, kw, R, Imp, "right implication", seq, env)
        return Derivation(seq, ImpR(), (sub(0, Sequent(L | {p.left}, R | {p.right})),))
    if tag == "forallL":
        if "witness" not in kw:
            raise DerivationError("forallL needs :witness")
        hint = str(kw["X"]) if "X" in kw else None
        p = _principal(sig, kw, L, Forall, "left universal", seq, env, hint)
        r = parse_term(kw["witness"], sig, env)
        inst = instantiate(p, r)
        return Derivation(seq, ForallL(p.unknown, r), (sub(0, Sequent(L | {inst}, R)),))
    if tag == "forallR":
        if "X" not in kw:
            raise DerivationError("forallR needs :X naming the eigen-unknown")
        p = _principal(sig, kw, R, Forall, "right universal", seq, env)
        X = Unknown(str(kw["X"]), p.unknown.sort, p.unknown.pmss)
        env = {**env, X.name: X}
        inst = apply_subst(Subst({p.unknown: var(X)}, check=False), p.body)
        return Derivation(seq, ForallR(X), (sub(0, Sequent(L, R | {inst})),))
    raise DerivationError(f"unknown rule tag {tag}")


# ---------------------------------------------------------------------------
# writing derivations back out


def sequent_sexpr(seq: Sequent) -> list:
    return [Sym("sequent"),
            [Sym("left"), *(show(p) for p in _sorted(seq.left))],
            [Sym("right"), *(show(p) for p in _sorted(seq.right))]]


_TAGS = {Ax: "ax", AxR: "ax", BotL: "botL", ImpL: "impL", ImpR: "impR",
         ForallL: "forallL", ForallR: "forallR"}


def node_sexpr(d: Derivation) -> list:
    out = [Sym(_TAGS[type(d.rule)]), Sym(":seq"), sequent_sexpr(d.conclusion)]
    principal = _principal_of(d)
    if principal is not None:
        out += [Sym(":on"), show(principal)]
    match d.rule:
        case Ax(pi) if not pi.is_identity():
            out += [Sym(":perm"), str(pi)]
        case ForallL(_, r):
            out += [Sym(":witness"), show(r)]
        case ForallR(X):
            out += [Sym(":X"), Sym(X.name)]
    return out + [node_sexpr(p) for p in d.premises]


def _principal_of(d: Derivation):
    """The formula a rule node works on, recovered from its premises (None if none fits)."""
    L, R = d.conclusion.left, d.conclusion.right
    prem = [p.conclusion for p in d.premises]
    match d.rule:
        case ImpL():
            cands = [p for p in L if isinstance(p, Imp)
                     and p.left in prem[0].right and p.right in prem[1].left]
        case ImpR():
            cands = [p for p in R if isinstance(p, Imp)
                     and p.left in prem[0].left and p.right in prem[0].right]
        case ForallL(X, r):
            cands = [p for p in _matching_forall(L, X) if instantiate(p, r) in prem[0].left]
        case ForallR(X):
            cands = [p for p in _matching_forall(R, X)
                     if apply_subst(Subst({p.unknown: var(X)}, check=False), p.body) in prem[0].right]
        case _:
            return None
    return _sorted(cands)[0] if cands else None


def dump_derivation(d: Derivation) -> str:
    """Every node carries ``:seq`` so the file is independent of elaboration."""
    return sexpr.dumps([Sym("derivation"), sequent_sexpr(d.conclusion), node_sexpr(d)]) + "\n"
