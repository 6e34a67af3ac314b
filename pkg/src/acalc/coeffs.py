"""Coefficient mini-language used by the command line.

Three forms::

    real: 3^n / n          real coefficients times the unity
    element: [1, 1]        a constant coefficient c_n = (1, 1)
    element: [[1,0],[0,1]] a polynomial, coefficients c_0, c_1, ... then zero
    builtin: band          one of exp, cos, sin, cosh, sinh, geometric, band

Real expressions allow number literals, ``n``, ``+ - * / ^``, postfix ``!``
and ``fact(...)``. Integers stay exact (``3^n`` is an exact integer) until a
division, which rounds once. Division by zero yields 0, so ``3^n/n`` has
``c_0 = 0``. Overflow yields ``inf``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from typing import Callable, Union

from .algebra import AlgebraSpec, Element
from .errors import CoefficientParseError, DimensionMismatch
from .power_series import PowerSeries
from .transcendental import function_series

Number = Union[int, float]
Expr = Callable[[int], Number]

BUILTINS = ("exp", "cos", "sin", "cosh", "sinh", "geometric", "band")

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^!()]))")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str, offset: int, full: str) -> list[_Tok]:
    toks = []
    i = 0
    while i < len(text):
        if text[i:].strip() == "":
            break
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            j = i
            while j < len(text) and text[j].isspace():
                j += 1
            raise CoefficientParseError(f"unexpected character {text[j]!r}", full, offset + j)
        kind = m.lastgroup
        toks.append(_Tok(kind, m.group(kind), offset + m.start(kind)))
        i = m.end()
    toks.append(_Tok("end", "", offset + len(text)))
    return toks


def _safe(op: Callable[[Number, Number], Number]) -> Callable[[Number, Number], Number]:
    def run(a: Number, b: Number) -> Number:
        try:
            return op(a, b)
        except ZeroDivisionError:
            return 0.0
        except OverflowError:
            return math.inf

    return run


def _fact(x: Number) -> Number:
    if isinstance(x, float):
        if not x.is_integer():
            raise ValueError(f"factorial of non-integer {x}")
        x = int(x)
    if x < 0:
        raise ValueError(f"factorial of negative {x}")
    return math.factorial(x)


def _pow(a: Number, b: Number) -> Number:
    if isinstance(a, int) and isinstance(b, int) and b >= 0:
        return a**b
    return float(a) ** float(b)


_BINARY = {
    "+": _safe(lambda a, b: a + b),
    "-": _safe(lambda a, b: a - b),
    "*": _safe(lambda a, b: a * b),
    "/": _safe(lambda a, b: a / b),
    "^": _safe(_pow),
}


class _Parser:
    def __init__(self, toks: list[_Tok], full: str):
        self.toks = toks
        self.i = 0
        self.full = full

    @property
    def cur(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        raise CoefficientParseError(msg, self.full, (tok or self.cur).pos)

    def eat(self, text: str) -> None:
        if self.cur.text != text:
            self.fail(f"expected {text!r}")
        self.i += 1

    def parse(self) -> Expr:
        e = self.expr()
        if self.cur.kind != "end":
            self.fail(f"unexpected {self.cur.text!r}")
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.cur.text in ("+", "-"):
            op = _BINARY[self.cur.text]
            self.i += 1
            right = self.term()
            left = (lambda l, r, op: lambda n: op(l(n), r(n)))(left, right, op)
        return left

    def term(self) -> Expr:
        left = self.unary()
        while self.cur.text in ("*", "/"):
            op = _BINARY[self.cur.text]
            self.i += 1
            right = self.unary()
            left = (lambda l, r, op: lambda n: op(l(n), r(n)))(left, right, op)
        return left

    def unary(self) -> Expr:
        if self.cur.text in ("-", "+"):
            neg = self.cur.text == "-"
            self.i += 1
            inner = self.unary()
            return (lambda n: -inner(n)) if neg else inner
        return self.power()

    def power(self) -> Expr:
        base = self.postfix()
        if self.cur.text == "^":
            self.i += 1
            exp_ = self.unary()  # right associative, binds tighter than unary minus on the left
            op = _BINARY["^"]
            return lambda n: op(base(n), exp_(n))
        return base

    def postfix(self) -> Expr:
        e = self.atom()
        while self.cur.text == "!":
            self.i += 1
            e = (lambda inner: lambda n: _fact(inner(n)))(e)
        return e

    def atom(self) -> Expr:
        tok = self.cur
        if tok.kind == "num":
            self.i += 1
            value: Number = int(tok.text) if tok.text.isdigit() else float(tok.text)
            return lambda n: value
        if tok.kind == "name":
            self.i += 1
            if tok.text == "n":
                return lambda n: n
            if tok.text == "fact":
                self.eat("(")
                inner = self.expr()
                self.eat(")")
                return lambda n: _fact(inner(n))
            self.fail(f"unknown name {tok.text!r}", tok)
        if tok.text == "(":
            self.i += 1
            inner = self.expr()
            self.eat(")")
            return inner
        if tok.kind == "end":
            self.fail("unexpected end of expression")
        self.fail(f"unexpected {tok.text!r}")


def parse_real(expr: str, full: str | None = None, offset: int = 0) -> Callable[[int], float]:
    """Compile a real expression in ``n`` to ``n -> float``."""
    full = expr if full is None else full
    fn = _Parser(_tokenize(expr, offset, full), full).parse()

    def a(n: int) -> float:
        v = fn(n)
        try:
            return float(v)
        except OverflowError:
            return math.inf if v > 0 else -math.inf

    return a


@dataclass(frozen=True)
class CoeffSpec:
    """A parsed coefficient specification; :meth:`build` binds it to an algebra."""

    kind: str  # "real" | "constant" | "polynomial" | "builtin"
    text: str
    real: Callable[[int], float] | None = None
    data: tuple = ()
    builtin: str = ""

    def build(self, algebra: AlgebraSpec, center: Element | None = None) -> PowerSeries:
        name = self.text
        if self.kind == "real":
            return PowerSeries.from_real(algebra, self.real, center, name=name)
        if self.kind == "constant":
            d = Element(algebra, _coords(self.data, algebra, self.text))
            return PowerSeries.along(algebra, d, lambda n: 1.0, center, name=name)
        if self.kind == "polynomial":
            rows = [Element(algebra, _coords(r, algebra, self.text)) for r in self.data]
            zero = algebra.zero()
            return PowerSeries(algebra, lambda n: rows[n] if n < len(rows) else zero, center, name=name)
        if self.builtin == "geometric":
            return PowerSeries.from_real(algebra, lambda n: 1.0, center, name="geometric")
        if self.builtin == "band":
            if algebra.dim < 2:
                raise DimensionMismatch("the band series needs a second basis element")
            return PowerSeries.along(algebra, algebra.one() + algebra.basis(1), lambda n: 1.0, center, name="band")
        s = function_series(self.builtin, algebra)
        return s if center is None else s.with_center(center)


def _coords(values, algebra: AlgebraSpec, text: str):
    if len(values) != algebra.dim:
        raise DimensionMismatch(f"{text!r}: expected {algebra.dim} coordinates, got {len(values)}")
    return [float(v) for v in values]


def parse_coeffs(text: str) -> CoeffSpec:
    """Parse ``real:...``, ``element:[...]`` or ``builtin:NAME``.

    Raises:
        CoefficientParseError: with the offending position.
    """
    head, sep, body = text.partition(":")
    if not sep:
        raise CoefficientParseError("expected 'real:', 'element:' or 'builtin:'", text, 0)
    kind = head.strip()
    offset = len(head) + 1
    if kind == "real":
        return CoeffSpec("real", text, real=parse_real(body, text, offset))
    if kind == "builtin":
        name = body.strip()
        if name not in BUILTINS:
            pos = offset + (len(body) - len(body.lstrip()))
            raise CoefficientParseError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}", text, pos)
        return CoeffSpec("builtin", text, builtin=name)
    if kind == "element":
        try:
            data = json.loads(body)
        except json.JSONDecodeError as exc:
            raise CoefficientParseError(f"bad element list: {exc.msg}", text, offset + exc.pos) from None
        pos = offset + (len(body) - len(body.lstrip()))
        if not isinstance(data, list) or not data:
            raise CoefficientParseError("expected a non-empty list", text, pos)
        if all(isinstance(v, (int, float)) for v in data):
            return CoeffSpec("constant", text, data=tuple(data))
        if all(isinstance(r, list) and r and all(isinstance(v, (int, float)) for v in r) for r in data):
            return CoeffSpec("polynomial", text, data=tuple(tuple(r) for r in data))
        raise CoefficientParseError("expected a list of numbers or a list of number lists", text, pos)
    raise CoefficientParseError(f"unknown coefficient form {kind!r}", text, len(head) - len(head.lstrip()))
