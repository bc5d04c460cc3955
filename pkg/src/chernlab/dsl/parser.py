"""Recursive-descent parser for metric-entry expressions.

Grammar::

    expr   := term (("+"|"-") term)*
    term   := factor (("*"|"/") factor)*
    factor := atom ("^" integer)? | "-" factor
    atom   := number | "i" | ident | "(" expr ")" | ("exp"|"log") "(" expr ")"
    ident  := ("z"|"w") positive-integer

Whitespace is insignificant. Numbers are decimal literals with an optional
exponent; exponents of ``^`` may carry a leading minus sign.
"""

from __future__ import annotations

import re

from ..errors import ParseError
from .expr import Binary, Const, Expression, Func, Neg, Pow, Var

_TOKEN = re.compile(
    r"\s*(?:"
    r"(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


def _tokenize(src: str):
    tokens = []
    pos = 0
    while True:
        while pos < len(src) and src[pos].isspace():
            pos += 1
        if pos >= len(src):
            break
        m = _TOKEN.match(src, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {src[pos]!r}", _byte_offset(src, pos), src)
        kind = m.lastgroup
        start = m.start(kind)
        tokens.append((kind, m.group(kind), start))
        pos = m.end()
    tokens.append(("end", "", len(src)))
    return tokens


def _byte_offset(src: str, pos: int) -> int:
    return len(src[:pos].encode("utf-8"))


class _Parser:
    def __init__(self, src: str, n: int):
        self.src = src
        self.n = n
        self.tokens = _tokenize(src)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def fail(self, message, tok):
        raise ParseError(message, _byte_offset(self.src, tok[2]), self.src)

    def expect(self, value):
        tok = self.take()
        if tok[0] != "op" or tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def parse(self) -> Expression:
        e = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            self.fail(f"unexpected token {tok[1]!r}", tok)
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = Binary(op, e, self.term())
        return e

    def term(self):
        e = self.factor()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = Binary(op, e, self.factor())
        return e

    def factor(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.factor())
        base = self.atom()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.take()
            if tok[0] != "number" or not tok[1].isdigit():
                self.fail("exponent must be an integer", tok)
            return Pow(base, sign * int(tok[1]))
        return base

    def atom(self):
        tok = self.take()
        kind, text = tok[0], tok[1]
        if kind == "number":
            return Const(complex(float(text)))
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if kind == "name":
            if text == "i":
                return Const(1j)
            if text in ("exp", "log"):
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(text, arg)
            m = re.fullmatch(r"([zw])([1-9]\d*)", text)
            if m is None:
                self.fail(f"unknown identifier {text!r}", tok)
            index = int(m.group(2))
            if index > self.n:
                self.fail(f"variable {text} out of range for dimension {self.n}", tok)
            return Var(m.group(1), index)
        self.fail(f"unexpected token {text or 'end of input'!r}", tok)


def parse_expression(src: str, n: int) -> Expression:
    """Parse ``src`` into an expression over ``z1..zn`` and ``w1..wn``.

    Raises
    ------
    ParseError
        On a syntax error, an unknown identifier or a variable index
        outside ``1..n``; ``offset`` locates the problem in ``src``.
    """
    return _Parser(src, n).parse()
