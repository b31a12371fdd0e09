"""Recursive-descent parser for polynomial potentials in x.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/')? unary)*      # juxtaposition multiplies: 2x^2
    unary  := ('+' | '-') unary | power
    power  := atom ('^' unary)?                # exponent must reduce to a nonnegative integer
    atom   := NUMBER | 'x' | '(' expr ')'

Numbers may be integers, decimals or exponent notation; arithmetic is exact
(fractions), so "1/3*x^4 + 1/2 x^2" keeps rational coefficients until the end.
Division is only allowed by constants.
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import List, Tuple

from .equilibrium import Potential


class PotentialSyntaxError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)|(x)|(\*\*|[-+*/^()]))")

Poly = List[Fraction]  # ascending coefficients


def _trim(p: Poly) -> Poly:
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def _add(p: Poly, q: Poly, sign: int = 1) -> Poly:
    n = max(len(p), len(q))
    return _trim([(p[i] if i < len(p) else 0) + sign * (q[i] if i < len(q) else 0) for i in range(n)])


def _mul(p: Poly, q: Poly) -> Poly:
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a:
            for j, b in enumerate(q):
                out[i + j] += a * b
    return _trim(out)


def _tokenize(text: str) -> List[Tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PotentialSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r} at position {pos}")
        num, var, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif var is not None:
            out.append(("x", var))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else ("end", "")

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, v = self.take()
        if v != value:
            raise PotentialSyntaxError(f"expected {value!r}, got {v or 'end of input'!r}")

    def parse(self) -> Poly:
        if not self.toks:
            raise PotentialSyntaxError("empty expression")
        p = self.expr()
        if self.peek()[0] != "end":
            raise PotentialSyntaxError(f"unexpected {self.peek()[1]!r}")
        return p

    def expr(self) -> Poly:
        p = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            sign = 1 if self.take()[1] == "+" else -1
            p = _add(p, self.term(), sign)
        return p

    def term(self) -> Poly:
        p = self.unary()
        while True:
            kind, v = self.peek()
            if (kind, v) == ("op", "*"):
                self.take()
                p = _mul(p, self.unary())
            elif (kind, v) == ("op", "/"):
                self.take()
                q = self.unary()
                if len(q) != 1 or q[0] == 0:
                    raise PotentialSyntaxError("division only by a nonzero constant")
                p = [c / q[0] for c in p]
            elif kind in ("num", "x") or (kind, v) == ("op", "("):
                p = _mul(p, self.unary())
            else:
                return p

    def unary(self) -> Poly:
        kind, v = self.peek()
        if (kind, v) == ("op", "-"):
            self.take()
            return [-c for c in self.unary()]
        if (kind, v) == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> Poly:
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            e = self.unary()
            if len(e) != 1 or e[0].denominator != 1 or e[0] < 0:
                raise PotentialSyntaxError("exponent must be a nonnegative integer")
            out: Poly = [Fraction(1)]
            for _ in range(int(e[0])):
                out = _mul(out, base)
            return out
        return base

    def atom(self) -> Poly:
        kind, v = self.take()
        if kind == "num":
            return [Fraction(v)]
        if kind == "x":
            return [Fraction(0), Fraction(1)]
        if (kind, v) == ("op", "("):
            p = self.expr()
            self.expect(")")
            return p
        raise PotentialSyntaxError(f"unexpected {v or 'end of input'!r}")


def parse_coefficients(text: str) -> List[Fraction]:
    """Exact ascending coefficients of a polynomial expression in x."""
    return _Parser(text).parse()


def parse_potential(text: str) -> Potential:
    return Potential([float(c) for c in parse_coefficients(text)])
