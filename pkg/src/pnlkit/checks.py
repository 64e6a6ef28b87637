"""Randomised end-to-end checks shared by the command line and the test suite."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .atoms import PermissionSet, atom
from .gen import IOTA, TermGen, ValueGen, lambda_signature, standard_universe
from .nomsem import PnlValuation, herbrand, shape_pred, square_check
from .syntax import Forall, Imp, Unknown, canon
from .text import parse_signature
from .translate import translate_signature

SQUARE_EXTRA = """\
propformer good : iota
propformer binds : [nu]iota
propformer named : nu
"""


def square_signature():
    """The lambda-calculus signature plus unary predicates so that not only equality is tested."""
    from .gen import LAMBDA_SIG_TEXT

    return parse_signature(LAMBDA_SIG_TEXT + SQUARE_EXTRA)


def square_unknowns() -> tuple:
    X, Y = standard_universe().unknowns
    Z = Unknown("Z", IOTA, PermissionSet(removes={atom("nu#-1")}))
    return X, Y, Z


@dataclass
class SquareReport:
    total: int = 0
    mismatches: list = field(default_factory=list)
    quantified: int = 0
    truths: tuple = (0, 0)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_dict(self) -> dict:
        return {"total": self.total, "quantified": self.quantified, "false": self.truths[0], "true": self.truths[1],
                "mismatches": self.mismatches, "ok": self.ok}


def forall_witnesses(phi, vg: ValueGen, per: int = 3) -> dict:
    """A witness list for each quantifier of ``phi``, keyed by the bound unknown's name."""
    out: dict = {}

    def go(p):
        match p:
            case Imp(l, r):
                go(l)
                go(r)
            case Forall(X, body):
                out[X.name] = [vg.value(X.sort, 3, X.pmss) for _ in range(per)]
                go(body)

    go(phi)
    return out


def square_test(count: int = 200, forall_count: int = 20, seed: int = 0) -> SquareReport:
    """Compare the direct PNL denotation with the HOL route on random propositions."""
    sig = square_signature()
    st = translate_signature(sig)
    rng = random.Random(seed)
    unknowns = square_unknowns()
    tg = TermGen(sig, rng, unknowns=unknowns)
    vg = ValueGen(sig, rng)
    rep = SquareReport()
    truths = [0, 0]
    for i in range(count + forall_count):
        quantified = i >= count
        I = herbrand(sig, {P: shape_pred(P, rng.randrange(1 << 16))
                           for P in ("good", "binds", "named")})
        phi = tg.prop(4 if quantified else 3, quantifiers=quantified)
        if quantified and not _has_forall(phi):
            phi = Forall(rng.choice(unknowns), phi)
        phi = canon(phi)
        s = PnlValuation(sig, {X: vg.value(X.sort, 3, X.pmss) for X in unknowns})
        ws = forall_witnesses(phi, vg) if quantified else None
        left, right = square_check(I, st, phi, s, witnesses=ws)
        truths[left] += 1
        rep.total += 1
        rep.quantified += quantified
        if left != right:
            rep.mismatches.append({"prop": str(phi), "pnl": left, "hol": right})
    rep.truths = tuple(truths)
    return rep


def _has_forall(phi) -> bool:
    match phi:
        case Forall():
            return True
        case Imp(l, r):
            return _has_forall(l) or _has_forall(r)
    return False


def lambda_setup():
    sig = lambda_signature()
    return sig, translate_signature(sig)
