import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import P
from hamsec.classify import (check_normal_form_conditions, classify_section, hessian_restricted,
                             is_morse, typical)
from hamsec.errors import InvalidSection
from hamsec.generators import disguise, random_section, section_template
from hamsec.classify import assemble_prepared
from hamsec.jets import Chart, Jet
from hamsec.poisson import bracket, first_nonvanishing

seeds = st.integers(0, 10**6)


def witness(cls, name):
    return dict(cls.witnesses)[name]


def test_nonsingular():
    assert classify_section(P("x")).tag == "Nonsingular"


def test_melrose():
    cls = classify_section(P("x^2 + y + p1"))
    assert cls.name == "S(1,1)" and cls.typical
    assert witness(cls, "{f,h}(0)") == 0
    assert witness(cls, "{f,h}_1(0)") == 2
    assert witness(cls, "{h,f}_1(0)") == -2


def test_cusp():
    cls = classify_section(P("x^3 + q1*x + p1"))
    assert (cls.k, cls.l) == (2, 1)
    assert witness(cls, "{f,h}_2(0)") == 6


def test_A1():
    cls = classify_section(P("x^2 + y + p1^2 + q1^2"))
    assert cls.tag == "A1"
    assert witness(cls, "{f,{f,h}}(0)") == 2
    assert witness(cls, "{h,{h,f}}(0)") == -2


def test_invalid_and_undetermined():
    with pytest.raises(InvalidSection):
        classify_section(P("1 + x"))
    with pytest.raises(InvalidSection):
        classify_section(P("x^2"))
    cls = classify_section(P("x^7 + p1", order=5))
    assert cls.tag == "Undetermined" and not cls.determined


def test_degenerate():
    assert classify_section(P("x^2 + y*p1 + y")).tag in ("S", "Degenerate")
    assert classify_section(P("x^2 + y + p1^2")).tag == "Degenerate"


def test_hessian_examples():
    H = hessian_restricted(P("x^2 + p1^2 + q1^2 + y"))
    assert H == [[2, 0, 0], [0, 2, 0], [0, 0, 2]] and is_morse(H)
    assert not is_morse(hessian_restricted(P("x^2 + y")))
    assert is_morse(hessian_restricted(P("x^2 + p1*q1 + y")))


def test_normal_form_conditions():
    orb = Chart.orbit(1)
    rep = check_normal_form_conditions([P("p1 + y", kind="orbit")], 1)
    assert rep["ok"] and rep["l"] == 1
    rep = check_normal_form_conditions([P("p1", kind="orbit"), P("q1", kind="orbit")], 2)
    assert rep["values"]["{R0,R1}_0(0)"] == -1 and rep["l"] == 1 and rep["ok"]
    assert bracket(Jet.var(orb, "p1", 3), Jet.var(orb, "q1", 3)).eval0() == -1


def test_bracket_bookkeeping_on_cusp():
    h = P("x^3 + q1*x + p1")
    y = P("y")
    l, v = first_nonvanishing(h, y, start=1)
    rep = check_normal_form_conditions([P("p1", kind="orbit"), P("q1", kind="orbit")], 2)
    assert l == 1 and v != 0 and rep["values"]["{R0,R1}_0(0)"] != 0


def test_typicality_rule():
    assert typical(3, 1, n=1) and not typical(4, 1, n=1)
    assert typical(2, 2, n=1) and not typical(2, 3, n=1)
    assert typical(5, None, n=2) and not typical(6, None, n=2)


# S(2,3) is left out: with g'(0) != 0, Z_h^3 f(0) = -6 g'(0)^2 != 0 forces l <= 2
@pytest.mark.parametrize("k,l,n", [(1, 1, 1), (2, 1, 1), (3, 1, 1), (1, 2, 1), (1, 3, 1),
                                   (2, 2, 1), (1, 1, 2), (4, 1, 2), (3, 2, 2), (2, 2, 2),
                                   (1, 4, 2)])
def test_templates_round_trip(k, l, n):
    rng = random.Random(100 * k + 10 * l + n)
    R = section_template(k, l, n, 8, rng)
    cls = classify_section(assemble_prepared(R, k, 8))
    assert (cls.tag, cls.k, cls.l) == ("S", k, l)


@settings(max_examples=15)
@given(seeds)
def test_invariance_under_isotropy_and_units(seed):
    rng = random.Random(seed)
    k, l = rng.choice([(1, 1), (2, 1), (1, 2), (2, 2)])
    h, _ = random_section(k, l, 1, 7, rng, disguised=False, check_moduli=False)
    h2 = disguise(h, rng)[0]
    a, b = classify_section(h), classify_section(h2)
    assert (a.tag, a.k, a.l) == (b.tag, b.k, b.l) == ("S", k, l)
