"""Tiny expression language for piecewise nonlinearities.

Grammar (whitespace is insignificant)::

    spec   := piece { ";" piece }
    piece  := "[" number "," ( number | "inf" ) ")" ":" expr
    expr   := term { ("+" | "-") term }
    term   := factor { "*" factor }
    factor := number | "u" | "t" | "(" expr ")" | factor "^" number

A leading ``-`` is also accepted in front of a factor and in front of an
exponent; ``(-2)`` is read as the literal -2.  Expressions are parsed into
small frozen dataclasses so two parses of the same text compare equal.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

__all__ = [
    "DSLSyntaxError",
    "Num",
    "Var",
    "BinOp",
    "Pow",
    "Neg",
    "Expr",
    "parse_pieces",
    "parse_expr",
    "to_text",
    "evaluate",
    "variables",
]


class DSLSyntaxError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        caret = ""
        if text:
            caret = f"\n  {text}\n  {' ' * position}^"
        super().__init__(f"{message} at position {position}{caret}")


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: float


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


Expr = Union[Num, Var, BinOp, Pow, Neg]

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]+)|(?P<op>[-+*^();:,\[\]]))"
)


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise DSLSyntaxError(f"unexpected character {text[col]!r}", col, text)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message):
        raise DSLSyntaxError(message, self.tok[2], self.text)

    def take(self, value=None, kind=None):
        k, v, _ = self.tok
        if (value is not None and v != value) or (kind is not None and k != kind):
            want = repr(value) if value is not None else kind
            got = repr(v) if v else "end of input"
            self.error(f"expected {want}, found {got}")
        self.i += 1
        return v

    def at(self, value):
        return self.tok[1] == value and self.tok[0] == "op"

    def number(self, allow_inf=False):
        sign = 1.0
        if self.at("-"):
            self.take("-")
            sign = -1.0
        k, v, _ = self.tok
        if k == "num":
            self.i += 1
            return sign * float(v)
        if allow_inf and k == "name" and v == "inf":
            self.i += 1
            return sign * math.inf
        self.error(f"expected a number, found {v!r}" if v else "expected a number, found end of input")

    def _negative_literal(self):
        # "(-2)" is the literal -2, so rendered trees parse back unchanged
        seq = self.tokens[self.i : self.i + 4]
        return len(seq) == 4 and [v for _, v, _ in seq[:2]] == ["(", "-"] and seq[2][0] == "num" and seq[3][1] == ")"

    def spec(self):
        pieces = [self.piece()]
        while self.at(";"):
            self.take(";")
            if self.tok[0] == "end":
                break
            pieces.append(self.piece())
        if self.tok[0] != "end":
            self.error(f"unexpected {self.tok[1]!r}")
        return pieces

    def piece(self):
        self.take("[")
        lo = self.number()
        self.take(",")
        hi = self.number(allow_inf=True)
        self.take(")")
        self.take(":")
        return lo, hi, self.expr()

    def expr(self):
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.take()
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.at("*"):
            self.take("*")
            node = BinOp("*", node, self.factor())
        return node

    def factor(self):
        if self.at("-"):
            self.take("-")
            return Neg(self.factor())
        k, v, _ = self.tok
        if k == "num":
            self.i += 1
            node = Num(float(v))
        elif k == "name" and v in ("u", "t"):
            self.i += 1
            node = Var(v)
        elif self.at("(") and self._negative_literal():
            self.i += 4
            node = Num(-float(self.tokens[self.i - 2][1]))
        elif self.at("("):
            self.take("(")
            node = self.expr()
            self.take(")")
        else:
            self.error(f"expected a number, 'u', 't' or '(', found {v!r}" if v else "unexpected end of input")
        while self.at("^"):
            self.take("^")
            node = Pow(node, self.number())
        return node


def parse_pieces(text: str):
    """Parse a full spec into ``[(lo, hi, expr), ...]`` without validation."""
    return _Parser(text).spec()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    node = p.expr()
    if p.tok[0] != "end":
        p.error(f"unexpected {p.tok[1]!r}")
    return node


def _num(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


_PREC = {"+": 1, "-": 1, "*": 2}


def to_text(node: Expr, parent: int = 0) -> str:
    """Render an expression back into the DSL (parses to an equal tree)."""
    if isinstance(node, Num):
        s = _num(node.value)
        return f"({s})" if node.value < 0 else s
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        inner = to_text(node.operand, 3)
        s = f"-({inner})" if isinstance(node.operand, Num) else "-" + inner
        return f"({s})" if parent > 0 else s
    if isinstance(node, Pow):
        return f"{to_text(node.base, 4)}^{_num(node.exponent)}"
    prec = _PREC[node.op]
    # left-associative: the right operand of - or * needs parens at equal precedence
    s = f"{to_text(node.left, prec)} {node.op} {to_text(node.right, prec + 1)}"
    if node.op == "*":
        s = f"{to_text(node.left, prec)}*{to_text(node.right, prec + 1)}"
    return f"({s})" if prec < parent else s


def variables(node: Expr) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, (Neg,)):
        return variables(node.operand)
    if isinstance(node, Pow):
        return variables(node.base)
    return variables(node.left) | variables(node.right)


def evaluate(node: Expr, t, u):
    """Evaluate on numpy arrays; ``x^p`` with ``x = 0`` and ``p > 0`` gives 0."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return t if node.name == "t" else u
    if isinstance(node, Neg):
        return -evaluate(node.operand, t, u)
    if isinstance(node, Pow):
        base = evaluate(node.base, t, u)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.power(base, node.exponent)
    a = evaluate(node.left, t, u)
    b = evaluate(node.right, t, u)
    if node.op == "+":
        return a + b
    if node.op == "-":
        return a - b
    return a * b
