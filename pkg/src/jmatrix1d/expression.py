"""Arithmetic expressions in ``x`` for user-defined potentials.

Grammar (``^`` binds tighter than unary minus, which binds tighter than
``*`` and ``/``; ``^`` is right-associative and its exponent may carry
its own unary minus)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" exponent)?
    exponent:= ("-" | "+") exponent | power
    primary := NUMBER | "x" | "pi" | FUNC "(" expr ")" | "(" expr ")"

``FUNC`` is one of sin, cos, tan, exp, log, sqrt, abs, cosh, sinh, tanh.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import EvalError, ParseError

__all__ = ["FUNCTIONS", "CompiledExpression", "parse_expression"]

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "cosh": np.cosh,
    "sinh": np.sinh,
    "tanh": np.tanh,
}

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*")
_OPERAND = ("number", "x", "pi", "function", "'('", "'-'", "'+'")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(src):
    toks = []
    i = 0
    n = len(src)
    while i < n:
        ch = src[i]
        if ch.isspace():
            i += 1
            continue
        m = _NUMBER.match(src, i)
        if m:
            toks.append(_Tok("number", m.group(0), i))
            i = m.end()
            continue
        m = _NAME.match(src, i)
        if m:
            word = m.group(0)
            if word == "x" or word == "pi":
                toks.append(_Tok(word, word, i))
            elif word in FUNCTIONS:
                toks.append(_Tok("function", word, i))
            else:
                raise ParseError(f"unknown name {word!r}", _byte_offset(src, i), ("x", "pi", "function"))
            i = m.end()
            continue
        if ch in "+-*/^()":
            toks.append(_Tok(ch, ch, i))
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", _byte_offset(src, i), ("operator", "number", "x"))
    toks.append(_Tok("end", "", n))
    return toks


def _byte_offset(src, i):
    return len(src[:i].encode("utf-8"))


# AST nodes are tuples: ("num", v) | ("x",) | ("neg", a) | ("bin", op, a, b) | ("call", name, a)


class _Parser:
    def __init__(self, src):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, expected):
        t = self.peek()
        raise ParseError(msg, _byte_offset(self.src, t.pos), expected)

    def expect(self, kind):
        if self.peek().kind != kind:
            what = "end of input" if self.peek().kind == "end" else repr(self.peek().text)
            self.fail(f"unexpected {what}", (f"'{kind}'",))
        return self.take()

    def parse(self):
        if self.peek().kind == "end":
            self.fail("empty expression", _OPERAND)
        node = self.expr()
        if self.peek().kind != "end":
            self.fail(f"unexpected {self.peek().text!r}", ("operator", "end of input"))
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind in ("+", "-"):
            op = self.take().kind
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.take().kind
            node = ("bin", op, node, self.unary())
        return node

    def unary(self):
        k = self.peek().kind
        if k == "-":
            self.take()
            return ("neg", self.unary())
        if k == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek().kind == "^":
            self.take()
            return ("bin", "^", base, self.exponent())
        return base

    def exponent(self):
        k = self.peek().kind
        if k == "-":
            self.take()
            return ("neg", self.exponent())
        if k == "+":
            self.take()
            return self.exponent()
        return self.power()

    def primary(self):
        t = self.peek()
        if t.kind == "number":
            self.take()
            return ("num", float(t.text))
        if t.kind == "x":
            self.take()
            return ("x",)
        if t.kind == "pi":
            self.take()
            return ("num", float(np.pi))
        if t.kind == "function":
            self.take()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return ("call", t.text, arg)
        if t.kind == "(":
            self.take()
            node = self.expr()
            self.expect(")")
            return node
        what = "end of input" if t.kind == "end" else repr(t.text)
        self.fail(f"unexpected {what}", ("number", "x", "pi", "function", "'('"))


_BINOPS = {"+": np.add, "-": np.subtract, "*": np.multiply, "/": np.divide, "^": np.power}


def _compile(node):
    tag = node[0]
    if tag == "num":
        v = node[1]
        return lambda x: np.full(np.shape(x), v)
    if tag == "x":
        return lambda x: x
    if tag == "neg":
        f = _compile(node[1])
        return lambda x: np.negative(f(x))
    if tag == "bin":
        op = _BINOPS[node[1]]
        a, b = _compile(node[2]), _compile(node[3])
        return lambda x: op(a(x), b(x))
    fn = FUNCTIONS[node[1]]
    a = _compile(node[2])
    return lambda x: fn(a(x))


class CompiledExpression:
    """A parsed expression; calling it evaluates ``V(x)`` elementwise.

    Raises
    ------
    EvalError
        On division by zero, invalid operations (log of a negative
        number, for example) or overflow.
    """

    def __init__(self, source, tree):
        self.source = source
        self.tree = tree
        self._fn = _compile(tree)

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        try:
            with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
                out = np.asarray(self._fn(arr), dtype=float)
        except FloatingPointError as exc:
            raise EvalError(f"cannot evaluate {self.source!r}: {exc}") from exc
        if np.ndim(x) == 0:
            return float(out)
        return out

    def __repr__(self):
        return f"CompiledExpression({self.source!r})"


def parse_expression(source):
    """Parse ``source`` into a :class:`CompiledExpression`.

    Raises
    ------
    ParseError
        With the byte offset of the failure and the set of acceptable tokens.
    """
    if not isinstance(source, str):
        raise TypeError("expression source must be a string")
    return CompiledExpression(source, _Parser(source).parse())
