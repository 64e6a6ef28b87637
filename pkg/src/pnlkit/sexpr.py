"""A small s-expression reader and writer for derivation files.

Lists are Python lists, symbols are :class:`Sym`, and quoted strings are
plain ``str``.  Inside a string only ``\\"`` and ``\\\\`` are escapes, so HOL
lambdas can be written ``"\\x:mu_nu. x"`` without doubling the backslash.
"""

from __future__ import annotations

import re


class SexprError(ValueError):
    pass


class Sym(str):
    """A bare symbol such as ``forallL`` or ``:witness``."""

    def __repr__(self) -> str:
        return f"Sym({str(self)!r})"

    @property
    def is_keyword(self) -> bool:
        return self.startswith(":")


_TOKEN = re.compile(r'\s+|;[^\n]*|\(|\)|"(?:[^"\\]|\\.)*"|[^\s()";]+')


def loads(text: str):
    """Read exactly one s-expression."""
    stack: list = [[]]
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SexprError(f"unterminated string at offset {pos}")
        tok = m.group()
        pos = m.end()
        if tok[0].isspace() or tok[0] == ";":
            continue
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise SexprError(f"unbalanced ')' at offset {m.start()}")
            done = stack.pop()
            stack[-1].append(done)
        elif tok[0] == '"':
            stack[-1].append(re.sub(r'\\(["\\])', r"\1", tok[1:-1]))
        else:
            stack[-1].append(Sym(tok))
    if len(stack) != 1:
        raise SexprError("unbalanced '(' at end of input")
    if len(stack[0]) != 1:
        raise SexprError(f"expected one s-expression, found {len(stack[0])}")
    return stack[0][0]


def quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def dumps(x, indent: int = 0) -> str:
    """Print with one child list per line once a list holds nested lists."""
    if isinstance(x, Sym):
        return str(x)
    if isinstance(x, str):
        return quote(x)
    if not any(isinstance(i, list) for i in x):
        return "(" + " ".join(dumps(i) for i in x) + ")"
    pad = " " * (indent + 2)
    head, parts = [], []
    for i in x:
        if isinstance(i, list) or parts:
            parts.append(i)
        else:
            head.append(dumps(i))
    lines = ["(" + " ".join(head)]
    i = 0
    while i < len(parts):
        item = parts[i]
        if isinstance(item, Sym) and item.is_keyword and i + 1 < len(parts):
            lines.append(pad + str(item) + " " + dumps(parts[i + 1], indent + 2 + len(item) + 1))
            i += 2
        else:
            lines.append(pad + dumps(item, indent + 2))
            i += 1
    return "\n".join(lines) + ")"


def split_node(node) -> tuple:
    """``(tag :k v ... child ...)`` as ``(tag, {k: v}, [child, ...])``."""
    if not isinstance(node, list) or not node or not isinstance(node[0], Sym):
        raise SexprError(f"expected a (tag ...) list, got {node!r}")
    tag, kw, children = str(node[0]), {}, []
    rest = node[1:]
    i = 0
    while i < len(rest):
        item = rest[i]
        if isinstance(item, Sym) and item.is_keyword:
            if i + 1 >= len(rest):
                raise SexprError(f"keyword {item} has no value")
            kw[item[1:]] = rest[i + 1]
            i += 2
        else:
            children.append(item)
            i += 1
    return tag, kw, children
