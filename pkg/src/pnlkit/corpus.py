"""Access to the bundled theory files and derivations."""

from __future__ import annotations

from importlib import resources

from .proof import Derivation, load_derivation
from .syntax import Signature
from .text import parse_signature

_PKG = "pnlkit"


def _dir():
    return resources.files(_PKG).joinpath("corpus")


def names(suffix: str = "") -> list:
    return sorted(p.name for p in _dir().iterdir() if p.name.endswith(suffix))


def read(name: str) -> str:
    return _dir().joinpath(name).read_text()


def path(name: str) -> str:
    return str(_dir().joinpath(name))


def signature(name: str = "lambda.pnl") -> Signature:
    return parse_signature(read(name))


def derivation(name: str, sig: Signature | None = None) -> Derivation:
    sig = sig or signature()
    return load_derivation(sig, read(name))


def lambda_derivations() -> dict:
    """The derivations over the lambda-calculus theory, by file name."""
    sig = signature()
    return {n: load_derivation(sig, read(n)) for n in names(".deriv") if not n.startswith("perm")}


def perm_fixture() -> tuple:
    sig = signature("perm.pnl")
    return sig, load_derivation(sig, read("perm_swap.deriv"))
