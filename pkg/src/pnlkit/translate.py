"""From restricted PNL into HOL: sorts, terms, propositions and derivations.

An unknown ``X`` is raised to a HOL variable ``X_D`` applied to the atoms of
``D`` that ``X`` may mention, permuted by the suspension.  Capture typing
decides whether ``D`` is large enough for this to lose nothing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .atoms import Atom, PermissionSet
from .hol import (
    BOT,
    Const,
    HApp,
    HArrow,
    HolDerivation,
    HolSequent,
    HolSignature,
    HTerm,
    HTup,
    HTuple,
    HType,
    HAx,
    HBotL,
    HForallL,
    HForallR,
    HImpL,
    HImpR,
    Lam,
    O,
    Var,
    app,
    arrows,
    atom_var,
    lams,
    mk_forall,
    mk_imp,
    mu,
)
from .proof import (
    Ax,
    AxR,
    BotL,
    CheckReport,
    Derivation,
    ForallL,
    ForallR,
    ImpL,
    ImpR,
    Sequent,
    check_restricted,
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
    PermissionViolation,
    Pred,
    Signature,
    Sort,
    SortError,
    Susp,
    Tup,
    TupleSort,
    Unknown,
    free_atoms,
    free_unknowns,
    var,
)
from .text import show as show_pnl


class TranslationError(ValueError):
    pass


class CaptureError(TranslationError):
    def __init__(self, sequent, missing: tuple, D: tuple):
        self.sequent = sequent
        self.missing = missing
        self.D = D
        atoms = ", ".join(map(str, missing))
        super().__init__(f"D = {show_dlist(D)} does not capture {sequent}: add {atoms}")


def check_dlist(D: Sequence[Atom]) -> tuple:
    D = tuple(D)
    if len(set(D)) != len(D):
        raise TranslationError(f"D has repeated atoms: {show_dlist(D)}")
    return D


def show_dlist(D: Sequence[Atom]) -> str:
    return "[" + ",".join(map(str, D)) + "]"


def restrict_dlist(D: Sequence[Atom], pmss: PermissionSet) -> tuple:
    """``D`` intersected with a permission set, in ``D``'s order."""
    return tuple(a for a in D if a in pmss)


# ---------------------------------------------------------------------------
# sorts and signatures


def translate_sort(s: Sort) -> HType:
    match s:
        case NameSort(n) | BaseSort(n):
            return mu(n)
        case TupleSort(items):
            return HTuple(tuple(translate_sort(i) for i in items))
        case AbsSort(nu, body):
            return HArrow(mu(nu), translate_sort(body))
    raise SortError(f"not a sort: {s!r}")


@dataclass
class SigTranslation:
    pnl: Signature
    hol: HolSignature = field(default_factory=HolSignature)

    def __post_init__(self):
        sig = self.pnl
        self.hol.base_types = self.hol.base_types | {mu(s).name for s in sig.atom_sorts | sig.base_sorts}
        for f, (arg, res) in sig.term_formers.items():
            self.hol.consts[f"g_{f}"] = HArrow(translate_sort(arg), mu(res))
        for P, arg in sig.prop_formers.items():
            self.hol.consts[f"g_{P}"] = HArrow(translate_sort(arg), O)

    def former(self, name: str) -> Const:
        return Const(f"g_{name}", self.hol.consts[f"g_{name}"])

    def xd(self, X: Unknown, D: Sequence[Atom]) -> Var:
        """The raised variable ``X_D``; its name records the whole of ``D``."""
        gamma = restrict_dlist(D, X.pmss)
        ty = arrows(*(mu(a.sort) for a in gamma), translate_sort(X.sort))
        return Var(f"{X.name}@{show_dlist(D)}", ty)

    def declare(self, X: Unknown, D: Sequence[Atom]) -> Var:
        v = self.xd(X, D)
        self.hol.vars[v.name] = v
        return v

    def symbol_map(self, unknowns: Iterable[Unknown] = (), D: Sequence[Atom] = ()) -> dict:
        sig = self.pnl
        return {
            "sorts": {s: mu(s).name for s in sorted(sig.atom_sorts | sig.base_sorts)},
            "term_formers": {f: {"const": f"g_{f}", "type": str(self.hol.consts[f"g_{f}"])}
                             for f in sorted(sig.term_formers)},
            "prop_formers": {P: {"const": f"g_{P}", "type": str(self.hol.consts[f"g_{P}"])}
                             for P in sorted(sig.prop_formers)},
            "unknowns": {X.name: {"var": self.xd(X, D).name, "type": str(self.xd(X, D).type)}
                         for X in sorted(unknowns, key=lambda X: X.name)},
            "D": [str(a) for a in D],
        }


def translate_signature(sig: Signature) -> SigTranslation:
    return SigTranslation(sig)


# ---------------------------------------------------------------------------
# terms and propositions


def translate_term(st: SigTranslation, D: Sequence[Atom], r) -> HTerm:
    match r:
        case Atom():
            return atom_var(r)
        case Tup(items):
            return HTup(tuple(translate_term(st, D, i) for i in items))
        case App(f, arg):
            return HApp(st.former(f), translate_term(st, D, arg))
        case Abs(a, body):
            return Lam(atom_var(a), translate_term(st, D, body))
        case Susp(pi, X):
            return app(st.xd(X, D), *(atom_var(pi(d)) for d in restrict_dlist(D, X.pmss)))
    raise TranslationError(f"not a PNL term: {r!r}")


def translate_prop(st: SigTranslation, D: Sequence[Atom], phi) -> HTerm:
    match phi:
        case Bot():
            return BOT
        case Imp(l, r):
            return mk_imp(translate_prop(st, D, l), translate_prop(st, D, r))
        case Pred(P, arg):
            return HApp(st.former(P), translate_term(st, D, arg))
        case Forall(X, body):
            return mk_forall(st.xd(X, D), translate_prop(st, D, body))
    raise TranslationError(f"not a PNL proposition: {phi!r}")


def translate(st: SigTranslation, D: Sequence[Atom], t) -> HTerm:
    if isinstance(t, (Bot, Imp, Pred, Forall)):
        return translate_prop(st, D, t)
    return translate_term(st, D, t)


def witness_term(st: SigTranslation, D: Sequence[Atom], X: Unknown, r) -> HTerm:
    """``\\(D & pmss X). [[r]]_D``, the HOL witness matching ``X := r``."""
    gamma = restrict_dlist(D, X.pmss)
    return lams([atom_var(a) for a in gamma], translate_term(st, D, r))


# ---------------------------------------------------------------------------
# capture typing


def capture_requirements(t, A: frozenset = frozenset()) -> frozenset:
    """The atoms that must lie in ``D`` for ``D |- t : A`` to hold."""
    match t:
        case Atom() | Bot():
            return frozenset()
        case Tup(items):
            return frozenset().union(*(capture_requirements(i, A) for i in items))
        case App(_, arg) | Pred(_, arg):
            return capture_requirements(arg, A)
        case Abs(a, body):
            return capture_requirements(body, A | {a})
        case Susp(pi, X):
            return frozenset(b for b in pi.nontriv() | A if b in X.pmss)
        case Imp(l, r):
            return capture_requirements(l, A) | capture_requirements(r, A)
        case Forall(_, body):
            return capture_requirements(body, A)
    raise TranslationError(f"not PNL syntax: {t!r}")


def capture_check(D: Sequence[Atom], t, A: Iterable[Atom] = ()) -> bool:
    return capture_requirements(t, frozenset(A)) <= set(D)


def capture_infer_minimal(subjects: Iterable) -> tuple:
    need = frozenset().union(*(capture_requirements(s) for s in subjects))
    return tuple(sorted(need))


# ---------------------------------------------------------------------------
# derivations


def translate_sequent(st: SigTranslation, D: Sequence[Atom], seq: Sequent) -> HolSequent:
    key = show_pnl
    return HolSequent.of([translate_prop(st, D, p) for p in sorted(seq.left, key=key)],
                         [translate_prop(st, D, p) for p in sorted(seq.right, key=key)])


def translate_derivation(st: SigTranslation, d: Derivation, D: Sequence[Atom] | None = None):
    """Translate a restricted derivation; returns ``(hol_derivation, D)``.

    ``D`` defaults to the minimal list capturing every sequent in ``d``.
    """
    for path, node in d.nodes():
        if isinstance(node.rule, Ax) and not node.rule.pi.is_identity():
            raise TranslationError(
                f"node {path} uses the axiom rule with permutation {node.rule.pi}; "
                "equivariant axiom instances have no sound HOL counterpart "
                f"(e.g. g_P a does not entail g_P b), so {node.conclusion} cannot be translated")
    report: CheckReport = check_restricted(st.pnl, d)
    if not report.ok:
        bad = report.failures()[0]
        raise TranslationError(f"derivation is not a restricted PNL derivation: node {bad.path}: {bad.message}")
    seqs = d.sequents()
    if D is None:
        D = capture_infer_minimal(p for s in seqs for p in s.props())
    D = check_dlist(D)
    for s in seqs:
        need = capture_infer_minimal(s.props())
        missing = tuple(a for a in need if a not in D)
        if missing:
            raise CaptureError(s, missing, D)
    return _tr_node(st, D, d), D


def _tr_node(st: SigTranslation, D: tuple, d: Derivation) -> HolDerivation:
    seq = translate_sequent(st, D, d.conclusion)
    prem = tuple(_tr_node(st, D, p) for p in d.premises)
    match d.rule:
        case Ax() | AxR():
            rule = HAx()
        case BotL():
            rule = HBotL()
        case ImpL():
            rule = HImpL()
        case ImpR():
            rule = HImpR()
        case ForallL(X, r):
            rule = HForallL(st.xd(X, D), witness_term(st, D, X, r))
        case ForallR(X):
            rule = HForallR(st.xd(X, D))
        case _:
            raise TranslationError(f"unknown rule {d.rule!r}")
    return HolDerivation(seq, rule, prem)


def translate_theory(st: SigTranslation, D: Sequence[Atom] | None = None) -> tuple:
    """The HOL signature with every PNL axiom translated; returns ``(hol_signature, D)``."""
    axioms = st.pnl.axioms
    if D is None:
        D = capture_infer_minimal(axioms.values())
    D = check_dlist(D)
    hol = HolSignature(st.hol.base_types, dict(st.hol.consts), dict(st.hol.vars))
    for name, phi in sorted(axioms.items()):
        need = capture_infer_minimal([phi])
        missing = tuple(a for a in need if a not in D)
        if missing:
            raise CaptureError(f"axiom {name}", missing, D)
        hol.axioms[name] = translate_prop(st, D, phi)
        for X in sorted(free_unknowns(phi), key=lambda X: X.name):
            v = st.xd(X, D)
            hol.vars[v.name] = v
    return hol, D


def declare_raised(st: SigTranslation, d: HolDerivation) -> None:
    """Add every free raised variable of ``d`` to the HOL signature (for printing files)."""
    from .hol import fv_of

    for _, node in d.nodes():
        for v in fv_of(node.conclusion.props()):
            if not v.is_atom:
                st.hol.vars[v.name] = v
        if isinstance(node.rule, HForallR):
            st.hol.vars[node.rule.var.name] = node.rule.var
        if isinstance(node.rule, HForallL):
            for v in fv_of([node.rule.witness]):
                if not v.is_atom:
                    st.hol.vars[v.name] = v


# ---------------------------------------------------------------------------
# the guard transform


def pi_guard_signature(sig: Signature, tau: str = "tau_pi") -> Signature:
    """Add a base sort ``tau`` and make every proposition former take a ``tau`` first."""
    if tau in sig.base_sorts or tau in sig.atom_sorts:
        raise SortError(f"sort {tau} is already declared")
    return Signature(
        atom_sorts=sig.atom_sorts,
        base_sorts=sig.base_sorts | {tau},
        term_formers=dict(sig.term_formers),
        prop_formers={P: TupleSort((BaseSort(tau), a)) for P, a in sig.prop_formers.items()},
        unknowns=dict(sig.unknowns),
    )


def pi_guard_prop(phi, Z: Unknown):
    """Thread ``Z`` through every predicate: ``P(r)`` becomes ``P(Z, r)``."""
    bad = free_atoms(phi).counterexample(Z.pmss)
    if bad is not None:
        raise PermissionViolation(Z, bad)
    return _guard(phi, Z)


def _guard(phi, Z: Unknown):
    match phi:
        case Bot():
            return phi
        case Imp(l, r):
            return Imp(_guard(l, Z), _guard(r, Z))
        case Pred(P, arg):
            return Pred(P, Tup((var(Z), arg)))
        case Forall(X, body, hint):
            if X == Z:
                raise TranslationError(f"guard unknown {Z.name} is bound in the proposition")
            return Forall(X, _guard(body, Z), hint)
    raise TranslationError(f"not a PNL proposition: {phi!r}")
