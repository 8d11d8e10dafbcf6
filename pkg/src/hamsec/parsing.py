"""Recursive-descent parser for polynomial text.

Grammar (whitespace-insensitive)::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := atom ('^' INT)?
    atom   := NUMBER | NAME | '(' expr ')' | '-' atom

``NUMBER`` is an integer or decimal-free rational written with ``/``
(``3/2*q1`` parses as ``(3/2)*q1``).  Division is only allowed by a
nonzero constant.  Names must belong to the chart.
"""

import re

import flint

from .errors import HamsecError
from .jets import Jet

__all__ = ["ParseError", "parse_polynomial", "parse_map"]

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()])|(\S))")


class ParseError(HamsecError, ValueError):
    """Syntax error or unknown variable, with 1-based line and column."""

    def __init__(self, message, text, pos):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line, self.column, self.pos = line, col, pos


def _tokenize(text):
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            break
        start = m.start(m.lastindex) if m.lastindex else pos
        if m.group(1):
            out.append(("num", int(m.group(1)), start))
        elif m.group(2):
            out.append(("name", m.group(2), start))
        elif m.group(3):
            out.append(("op", "^" if m.group(3) == "**" else m.group(3), start))
        elif m.group(4):
            raise ParseError(f"unexpected character {m.group(4)!r}", text, start)
        pos = m.end()
    out.append(("end", None, len(text)))
    return out


class _Parser:
    def __init__(self, text, chart):
        self.text = text
        self.chart = chart
        self.ctx = chart.ctx
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, self.text, tok[2])

    def expect(self, op):
        t = self.take()
        if t[0] != "op" or t[1] != op:
            self.fail(f"expected {op!r}", t)

    def parse(self):
        if self.peek()[0] == "end":
            self.fail("empty input")
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return v

    def expr(self):
        sign = 1
        if self.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        v = self.term()
        if sign < 0:
            v = -v
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            t = self.term()
            v = v + t if op == "+" else v - t
        return v

    def term(self):
        v = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            tok = self.peek()
            f = self.factor()
            if op == "*":
                v = v * f
            else:
                if not f.is_constant() or f.is_zero():
                    self.fail("division only by a nonzero constant", tok)
                v = v * (1 / f.leading_coefficient())
        return v

    def factor(self):
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.take()
            t = self.take()
            if t[0] != "num":
                self.fail("exponent must be a non-negative integer", t)
            base = base ** t[1]
        return base

    def atom(self):
        t = self.take()
        kind, val, _ = t
        if kind == "num":
            return self.ctx.constant(flint.fmpq(val))
        if kind == "name":
            if val not in self.chart.index:
                self.fail(f"unknown variable {val!r} (chart has {', '.join(self.chart.names)})", t)
            return self.ctx.gens()[self.chart.index[val]]
        if kind == "op" and val == "(":
            v = self.expr()
            self.expect(")")
            return v
        if kind == "op" and val == "-":
            return -self.atom()
        if kind == "end":
            self.fail("unexpected end of input", t)
        self.fail(f"unexpected token {val!r}", t)


def parse_polynomial(text, chart, order):
    """Parse ``text`` into a :class:`Jet` of the given order on ``chart``.

    Examples
    --------
    >>> from hamsec.jets import Chart
    >>> parse_polynomial("3/2*q1*p2 - q1^3", Chart.full(2), 4).nterms()
    2
    """
    poly = _Parser(text, chart).parse()
    return Jet.from_poly(chart, poly, order)


def parse_map(texts, chart, order):
    """Parse a list of component strings, or one string split on ``;`` or ``,``."""
    if isinstance(texts, str):
        texts = [t for t in re.split(r"[;,]", texts) if t.strip()]
    return [parse_polynomial(t, chart, order) for t in texts]
