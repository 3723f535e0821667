"""Polynomial expressions in x.

Grammar (whitespace ignored, one optional leading sign)::

    expr  := term (('+' | '-') term)*
    term  := coeff ('*' var)? | var
    var   := 'x' ('^' uint)?
    coeff := integer
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import ParseError
from ..exactalg import IntPoly

INTEGER = "integer"


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.i = 0

    def error(self, expected):
        offset = len(self.text[: self.i].encode("utf-8"))
        raise ParseError(self.text, offset, expected)

    def skip_ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.i] if self.i < len(self.text) else None

    def integer(self):
        self.skip_ws()
        start = self.i
        while self.i < len(self.text) and self.text[self.i] in "0123456789":
            self.i += 1
        if start == self.i:
            return None
        return int(self.text[start:self.i])

    def var(self):
        # caller has seen 'x'
        self.i += 1
        if self.peek() == "^":
            self.i += 1
            e = self.integer()
            if e is None:
                self.error({INTEGER})
            return e
        return 1

    def term(self):
        c = self.peek()
        if c == "x":
            return 1, self.var()
        coeff = self.integer()
        if coeff is None:
            self.error({INTEGER, "'x'"})
        if self.peek() == "*":
            self.i += 1
            if self.peek() != "x":
                self.error({"'x'"})
            return coeff, self.var()
        return coeff, 0

    def parse(self) -> IntPoly:
        coeffs: dict = {}
        sign = 1
        if self.peek() in ("+", "-"):
            sign = -1 if self.peek() == "-" else 1
            self.i += 1
        while True:
            c, e = self.term()
            coeffs[e] = coeffs.get(e, 0) + sign * c
            nxt = self.peek()
            if nxt is None:
                break
            if nxt not in ("+", "-"):
                self.error({"'+'", "'-'", "end of input"})
            sign = -1 if nxt == "-" else 1
            self.i += 1
        deg = max(coeffs)
        return IntPoly([coeffs.get(i, 0) for i in range(deg + 1)])


def parse_poly(text: str) -> IntPoly:
    return _Parser(text).parse()


def parse_rational(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"not a rational number: {text!r}") from exc
