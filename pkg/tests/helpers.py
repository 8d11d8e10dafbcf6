"""Test helpers: quick parsing, seeded jets, and a sympy bridge used as an
independent oracle for hand-derivable values."""

import random
from fractions import Fraction

import sympy

from hamsec.generators import random_poly
from hamsec.jets import Chart, Jet
from hamsec.parsing import parse_polynomial


def P(text, n=1, order=6, kind="full"):
    return parse_polynomial(text, Chart(n, kind), order)


def seeded_jet(seed, chart, order, lo=0, hi=None, terms=3):
    return random_poly(chart, order, random.Random(seed), lo, hi, terms)


def to_sympy(jet):
    syms = sympy.symbols(jet.chart.names)
    out = sympy.Integer(0)
    for exp, c in jet.to_dict().items():
        mono = sympy.Integer(1)
        for s, e in zip(syms, exp):
            mono *= s ** e
        out += sympy.Rational(c.numerator, c.denominator) * mono
    return sympy.expand(out)


def from_sympy(expr, chart, order):
    syms = sympy.symbols(chart.names)
    poly = sympy.Poly(sympy.expand(expr), *syms)
    coeffs = {e: sympy.Rational(c) for e, c in poly.terms() if sum(e) <= order}
    return Jet.from_dict(chart, {e: Fraction(int(c.p), int(c.q)) for e, c in coeffs.items()}, order)


