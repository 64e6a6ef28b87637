"""Permissive-nominal logic kernel: syntax, proof checking, HOL translation, semantics."""

__version__ = "0.1.0"
