"""Concrete syntax for PNL: tokenizer, recursive-descent parser, printer.

Sorts      ``nu``, ``iota``, ``[nu]iota``, ``(iota, iota)``, ``()``, ``(iota,)``
Terms      ``nu#-1``, ``(r1, r2)``, ``f(r1, r2)``, ``[nu#0] r``, ``((a b))*X``, ``X``
Props      ``bot``, ``P(r)``, ``phi => psi``, ``forall X:iota#perm(+{},-{}). phi``

Former application with several arguments builds a tuple; ``f()`` applies ``f``
to the unit tuple.  A 1-tuple argument is written ``f((r,))``.

Signature files hold one declaration per line (continuation lines start with
whitespace, ``;`` starts a comment)::

    atomsort nu
    basesort iota
    termformer lam : ([nu]iota) iota
    propformer eq : (iota, iota)
    unknown X : iota#perm(+{},-{})
    axiom eta : forall Z:iota#perm(+{},-{nu#-1}). eq(lam([nu#-1]app(Z, var(nu#-1))), Z)
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .atoms import DOWN, ID, Atom, PermissionSet, Permutation
from .syntax import (
    BOT,
    UNIT,
    AbsSort,
    Abs,
    App,
    BaseSort,
    Bot,
    Forall,
    Imp,
    NameSort,
    Pred,
    Signature,
    Sort,
    SortError,
    Susp,
    Tup,
    TupleSort,
    Unknown,
    canon,
    check_prop,
    sort_of,
    var,
)


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", pos: int | None = None):
        self.pos = pos
        if pos is not None and text:
            line = text.count("\n", 0, pos) + 1
            col = pos - (text.rfind("\n", 0, pos) + 1) + 1
            msg = f"{msg} (line {line}, column {col})"
        super().__init__(msg)


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|;[^\n]*)
  | (?P<atom>[A-Za-z_][\w']*\#-?\d+)
  | (?P<name>[A-Za-z_][\w']*(?:@\[[^\]]*\])?)
  | (?P<int>-?\d+)
  | (?P<str>"(?:[^"\\]|\\.)*")
  | (?P<op>=>|->|[()\[\]{},.:\#*+\-\\])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Tok:
    kind: str
    value: str
    pos: int


def tokenize(text: str) -> list:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        if m.lastgroup != "ws":
            out.append(Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(Tok("eof", "", len(text)))
    return out


class TokenStream:
    """Shared cursor logic for the PNL and HOL parsers."""

    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, k: int = 0) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.peek()
        self.i += 1
        return t

    def at(self, value: str, k: int = 0) -> bool:
        t = self.peek(k)
        return t.kind in ("op", "name") and t.value == value

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> Tok:
        if not self.at(value):
            self.fail(f"expected {value!r}")
        return self.next()

    def expect_kind(self, kind: str) -> Tok:
        if self.peek().kind != kind:
            self.fail(f"expected {kind}")
        return self.next()

    def fail(self, msg: str):
        t = self.peek()
        found = repr(t.value) if t.kind != "eof" else "end of input"
        raise ParseError(f"{msg}, found {found}", self.text, t.pos)

    def done(self):
        if self.peek().kind != "eof":
            self.fail("trailing input")

    def atom(self) -> Atom:
        t = self.expect_kind("atom")
        sort, _, idx = t.value.partition("#")
        return Atom(sort, int(idx))


KEYWORDS = {"forall", "bot", "perm"}


class PnlParser(TokenStream):
    def __init__(self, text: str, sig: Signature, env: dict | None = None):
        super().__init__(text)
        self.sig = sig
        self.env = dict(env or {})

    # sorts and permission sets

    def sort(self) -> Sort:
        if self.accept("["):
            nu = self.expect_kind("name").value
            self.expect("]")
            return AbsSort(nu, self.sort())
        if self.accept("("):
            if self.accept(")"):
                return UNIT
            first = self.sort()
            if self.accept(")"):
                return first
            items = [first]
            while self.accept(","):
                if self.at(")"):
                    break
                items.append(self.sort())
            self.expect(")")
            return TupleSort(tuple(items))
        t = self.expect_kind("name")
        if t.value in self.sig.atom_sorts:
            return NameSort(t.value)
        if t.value in self.sig.base_sorts:
            return BaseSort(t.value)
        raise ParseError(f"undeclared sort {t.value}", self.text, t.pos)

    def atom_set(self) -> frozenset:
        self.expect("{")
        out = []
        while not self.at("}"):
            out.append(self.atom())
            if not self.accept(","):
                break
        self.expect("}")
        return frozenset(out)

    def permset(self) -> PermissionSet:
        self.expect("perm")
        self.expect("(")
        self.expect("+")
        adds = self.atom_set()
        self.expect(",")
        self.expect("-")
        removes = self.atom_set()
        self.expect(")")
        try:
            return PermissionSet(adds, removes)
        except ValueError as e:
            self.fail(str(e))

    def permutation(self) -> Permutation:
        self.expect("(")
        cycles = []
        while self.accept("("):
            cyc = [self.atom()]
            while not self.at(")"):
                cyc.append(self.atom())
            self.expect(")")
            cycles.append(cyc)
        self.expect(")")
        try:
            return Permutation.from_cycles(cycles)
        except ValueError as e:
            self.fail(str(e))

    def binder(self) -> Unknown:
        name = self.expect_kind("name").value
        self.expect(":")
        s = self.sort()
        pmss = self.permset() if self.accept("#") else DOWN
        return Unknown(name, s, pmss)

    # terms

    def unknown(self, tok: Tok) -> Unknown:
        X = self.env.get(tok.value) or self.sig.unknowns.get(tok.value)
        if X is None:
            raise ParseError(f"undeclared unknown {tok.value}", self.text, tok.pos)
        return X

    def args(self):
        self.expect("(")
        items = []
        while not self.at(")"):
            items.append(self.term())
            if not self.accept(","):
                break
        self.expect(")")
        return items[0] if len(items) == 1 else Tup(tuple(items))

    def term(self):
        t = self.peek()
        if t.kind == "atom":
            return self.atom()
        if self.accept("["):
            a = self.atom()
            self.expect("]")
            return Abs(a, self.term())
        if t.kind == "op" and t.value == "(":
            save = self.i
            try:
                pi = self.permutation()
                self.expect("*")
            except ParseError:
                self.i = save
                return self.tuple_term()
            return Susp(pi, self.unknown(self.expect_kind("name")))
        if t.kind == "name" and t.value not in KEYWORDS:
            self.next()
            if self.at("("):
                if t.value not in self.sig.term_formers:
                    raise ParseError(f"undeclared term former {t.value}", self.text, t.pos)
                return App(t.value, self.args())
            return Susp(ID, self.unknown(t))
        self.fail("expected a term")

    def tuple_term(self):
        self.expect("(")
        if self.accept(")"):
            return Tup(())
        first = self.term()
        if self.accept(")"):
            return first
        items = [first]
        while self.accept(","):
            if self.at(")"):
                break
            items.append(self.term())
        self.expect(")")
        return Tup(tuple(items))

    # propositions

    def prop(self):
        left = self.qprop()
        if self.accept("=>"):
            return Imp(left, self.prop())
        return left

    def qprop(self):
        if self.accept("forall"):
            X = self.binder()
            self.expect(".")
            saved = self.env
            self.env = {**saved, X.name: X}
            try:
                body = self.prop()
            finally:
                self.env = saved
            return Forall(X, body, X.name)
        if self.accept("bot"):
            return BOT
        if self.accept("("):
            p = self.prop()
            self.expect(")")
            return p
        t = self.expect_kind("name")
        if t.value not in self.sig.prop_formers:
            raise ParseError(f"undeclared proposition former {t.value}", self.text, t.pos)
        return Pred(t.value, self.args())


def _checked(text: str, p: PnlParser, fn):
    try:
        out = fn()
        p.done()
    except SortError as e:
        raise ParseError(str(e), text) from e
    return out


def parse_term(text: str, sig: Signature, env: dict | None = None, raw: bool = False):
    p = PnlParser(text, sig, env)
    t = _checked(text, p, p.term)
    try:
        sort_of(sig, t)
    except SortError as e:
        raise ParseError(str(e), text) from e
    return t if raw else canon(t)


def parse_prop(text: str, sig: Signature, env: dict | None = None, raw: bool = False):
    p = PnlParser(text, sig, env)
    phi = _checked(text, p, p.prop)
    try:
        check_prop(sig, phi)
    except SortError as e:
        raise ParseError(str(e), text) from e
    return phi if raw else canon(phi)


def parse_sort(text: str, sig: Signature) -> Sort:
    p = PnlParser(text, sig)
    return _checked(text, p, p.sort)


def parse_permutation(text: str) -> Permutation:
    p = PnlParser(text, Signature())
    return _checked(text, p, p.permutation)


def parse_permset(text: str) -> PermissionSet:
    p = PnlParser(text, Signature())
    return _checked(text, p, p.permset)


# ---------------------------------------------------------------------------
# printing


def _args(arg) -> str:
    if isinstance(arg, Tup) and len(arg.items) != 1:
        return "(" + ", ".join(show(i) for i in arg.items) + ")"
    return f"({show(arg)})"


def show(t) -> str:
    match t:
        case Atom():
            return str(t)
        case Tup(items):
            if len(items) == 1:
                return f"({show(items[0])},)"
            return "(" + ", ".join(show(i) for i in items) + ")"
        case App(f, arg) | Pred(f, arg):
            return f + _args(arg)
        case Abs(a, body):
            return f"[{a}]{show(body)}"
        case Susp(pi, X):
            return X.name if pi.is_identity() else f"{pi}*{X.name}"
        case Bot():
            return "bot"
        case Imp(l, r):
            ls = show(l)
            if isinstance(l, (Imp, Forall)):
                ls = f"({ls})"
            return f"{ls} => {show(r)}"
        case Forall(X, body):
            return f"forall {show_binder(X)}. {show(body)}"
    raise TypeError(f"not PNL syntax: {t!r}")


def show_binder(X: Unknown) -> str:
    return f"{X.name}:{X.sort}#{X.pmss}"


# ---------------------------------------------------------------------------
# signature files


def logical_lines(text: str) -> list:
    """Join continuation lines and drop comments and blank lines."""
    out: list = []
    for raw in text.splitlines():
        line = raw.split(";", 1)[0].rstrip()
        if not line.strip():
            continue
        if raw[:1].isspace() and out:
            out[-1] += " " + line.strip()
        else:
            out.append(line.strip())
    return out


def parse_signature(text: str) -> Signature:
    sig = Signature()
    for line in logical_lines(text):
        kw, _, rest = line.partition(" ")
        rest = rest.strip()
        try:
            _declare(sig, kw, rest)
        except (SortError, ValueError) as e:
            raise ParseError(f"in {line!r}: {e}") from e
    return sig


def _declare(sig: Signature, kw: str, rest: str) -> None:
    if kw == "atomsort":
        if rest in sig.base_sorts:
            raise SortError(f"{rest} is already a base sort")
        sig.atom_sorts = sig.atom_sorts | {rest}
    elif kw == "basesort":
        if rest in sig.atom_sorts:
            raise SortError(f"{rest} is already a name sort")
        sig.base_sorts = sig.base_sorts | {rest}
    elif kw in ("termformer", "propformer", "unknown", "axiom"):
        name, sep, body = rest.partition(":")
        name = name.strip()
        if not sep or not name:
            raise ParseError(f"expected '{kw} NAME : ...'")
        if kw == "termformer":
            p = PnlParser(body, sig)
            arg = p.sort()
            res = p.expect_kind("name").value
            p.done()
            if res not in sig.base_sorts:
                raise SortError(f"term former {name} must return a base sort")
            if name in sig.term_formers or name in sig.prop_formers:
                raise SortError(f"former {name} declared twice")
            sig.term_formers[name] = (arg, res)
        elif kw == "propformer":
            if name in sig.term_formers or name in sig.prop_formers:
                raise SortError(f"former {name} declared twice")
            sig.prop_formers[name] = parse_sort(body, sig)
        elif kw == "unknown":
            p = PnlParser(body, sig)
            s = p.sort()
            pmss = p.permset() if p.accept("#") else DOWN
            p.done()
            sig.declare(Unknown(name, s, pmss))
        else:
            sig.axioms[name] = parse_prop(body, sig)
    else:
        raise ParseError(f"unknown declaration keyword {kw!r}")


def show_signature(sig: Signature) -> str:
    lines = [f"atomsort {s}" for s in sorted(sig.atom_sorts)]
    lines += [f"basesort {s}" for s in sorted(sig.base_sorts)]
    lines += [f"termformer {f} : {_grouped(a)} {r}" for f, (a, r) in sorted(sig.term_formers.items())]
    lines += [f"propformer {P} : {a}" for P, a in sorted(sig.prop_formers.items())]
    lines += [f"unknown {X.name} : {X.sort}#{X.pmss}" for _, X in sorted(sig.unknowns.items())]
    lines += [f"axiom {n} : {show(phi)}" for n, phi in sorted(sig.axioms.items())]
    return "\n".join(lines) + "\n"


def _grouped(s: Sort) -> str:
    return str(s) if isinstance(s, TupleSort) else f"({s})"


def unknown_in(sig: Signature, name: str) -> Unknown:
    if name not in sig.unknowns:
        raise ParseError(f"undeclared unknown {name}")
    return sig.unknowns[name]


__all__ = [
    "ParseError",
    "PnlParser",
    "TokenStream",
    "logical_lines",
    "parse_permset",
    "parse_permutation",
    "parse_prop",
    "parse_signature",
    "parse_sort",
    "parse_term",
    "show",
    "show_binder",
    "show_signature",
    "tokenize",
    "var",
]
