import random

import pytest
from hypothesis import given, settings, strategies as st

from helpers import P
from hamsec.classify import classify_section
from hamsec.errors import ClassMismatch, FormError, GenericityError, InvalidSection
from hamsec.forms import FormJet, is_closed, pullback, rank_at_origin, standard_symplectic
from hamsec.generators import (disguise, random_A1_section, random_closed_form,
                               random_isotropy_symplectomorphism, random_section)
from hamsec.jets import Chart, Jet, compose
from hamsec.linalg import signature
from hamsec.poisson import bracket
from hamsec.normalize import (kill_top_coefficient, moser_darboux_orbit, reduce_A1,
                              reduce_to_preliminary, verify_preliminary, weierstrass_prepare)

seeds = st.integers(0, 10**6)
ORB1 = Chart.orbit(1)


def O(text, n=1, order=6):
    return P(text, n, order, kind="orbit")


def all_true(checks):
    return all(checks.values())


# -- Weierstrass preparation ---------------------------------------------------

def test_prepare_cusp_is_already_prepared():
    u, R = weierstrass_prepare(P("x^3 + q1*x + p1"), 2)
    assert u == Jet.const(u.chart, u.order, 1)
    assert [str(r) for r in R] == ["p1", "q1", "0"]


def test_prepare_removes_unit():
    h = P("x^3 + x^2 + x*y + y", order=7)
    u, R = weierstrass_prepare(h, 1)
    assert [str(r) for r in R] == ["y", "0"]
    # u h = x^2 + y, checked against the explicit inverse of (1 + x)
    assert (u * h).truncate(7) == P("x^2 + y", order=7)
    inv = Jet.const(h.chart, 7, 0)
    for j in range(8):
        inv = inv + P("-x", order=7) ** j
    assert u == inv.truncate(7)


def test_prepare_melrose():
    u, R = weierstrass_prepare(P("x^2 + y + p1"), 1)
    assert u.eval0() == 1 and [str(r) for r in R] == ["y + p1", "0"]


@given(seeds)
@settings(max_examples=10)
def test_prepare_residual(seed):
    rng = random.Random(seed)
    h, _ = random_section(1 + seed % 2, 1, 1, 6, rng)
    k = classify_section(h).k
    u, R = weierstrass_prepare(h, k)
    full = h.chart
    x = Jet.var(full, "x", 6)
    rhs = x ** (k + 1)
    for i, r in enumerate(R):
        rhs = rhs + r.to_chart(full, 6) * x ** i
    assert u.eval0() != 0
    assert (u * h).truncate(6) == rhs.truncate(6)


# -- shift --------------------------------------------------------------------------

def test_kill_top_trivial():
    R = [O("y + p1"), O("0")]
    R2, c, om = kill_top_coefficient(R, 1)
    assert c.is_zero() and [str(r) for r in R2] == ["y + p1"]
    assert om == standard_symplectic(ORB1, om.order)


def test_kill_top_shift_by_y():
    # x^2 + 2xy + y + p1: x -> x - y gives x^2 - y^2 + y + p1
    _, R = weierstrass_prepare(P("x^2 + 2*x*y + y + p1"), 1)
    R2, c, om = kill_top_coefficient(R, 1)
    assert str(c) == "y"
    assert R2[0].truncate(5) == O("-y^2 + y + p1").truncate(5)
    assert is_closed(om) and rank_at_origin(om) == 2


def test_kill_top_shift_correction():
    # c = y*q1 puts dy^d(y q1) = y dy^dq1 into omega_hat
    _, R = weierstrass_prepare(P("x^2 + 2*x*y*q1 + y + p1"), 1)
    R2, c, om = kill_top_coefficient(R, 1)
    assert str(c) == "y*q1"
    assert om[("y", "q1")].truncate(3) == O("y").truncate(3)
    assert is_closed(om) and rank_at_origin(om) == 2


# -- Moser-Darboux ------------------------------------------------------------------

def test_moser_identity():
    phi = moser_darboux_orbit(standard_symplectic(ORB1, 5))
    assert phi.is_identity()


def test_moser_shear():
    om = standard_symplectic(ORB1, 5) + FormJet.dz(ORB1, ("y", "q1"), 5)
    phi = moser_darboux_orbit(om)
    assert [str(c) for c in phi] == ["y", "y + p1", "q1"]


def test_moser_higher_order():
    # dp^dq + d(y q1^2)^dq1 = dp^dq + q1^2 dy^dq1
    om = standard_symplectic(ORB1, 6) + FormJet(ORB1, 2, {("y", "q1"): O("q1^2")}, 6)
    phi = moser_darboux_orbit(om)
    K = om.order
    assert pullback(phi, standard_symplectic(ORB1, K + 1)).truncate(K) == om.truncate(K)
    assert phi["y"] == Jet.var(ORB1, "y", phi.order)


def test_moser_rejects_non_closed():
    bad = FormJet(ORB1, 2, {("p1", "q1"): O("1 + y")}, 4)
    with pytest.raises(FormError):
        moser_darboux_orbit(bad)


def test_moser_rejects_kernel_along_fibres():
    # dy^dp1 has a kernel along q1, inside the fibres of y
    om = FormJet.dz(ORB1, ("y", "p1"), 4)
    with pytest.raises((GenericityError, FormError)):
        moser_darboux_orbit(om)


@given(seeds, st.sampled_from([1, 2]))
@settings(max_examples=10)
def test_moser_pullback_identity(seed, n):
    om = random_closed_form(n, 5, random.Random(seed))
    orbit = om.chart
    phi, inv = moser_darboux_orbit(om, with_inverse=True)
    K = om.order
    assert pullback(phi, standard_symplectic(orbit, K + 1)).truncate(K) == om.truncate(K)
    assert phi["y"].truncate(K) == Jet.var(orbit, "y", K)
    back = [compose(c, list(inv.components)).truncate(K) for c in phi]
    assert back == [c.truncate(K) for c in Jet.coords(orbit, K)]


# -- full pipeline ------------------------------------------------------------------

def test_reduce_melrose():
    nf = reduce_to_preliminary(P("x^2 + y + p1"))
    assert [str(r) for r in nf.R] == ["y + p1"]
    assert nf.transform.is_identity() and nf.unit.eval0() == 1


def test_reduce_quadratic_times_unit():
    # h(x, 0) = x^2 (1 + x): a fold, k = 1
    assert reduce_to_preliminary(P("(1 + x)*(x^2 + q1*x + p1)", order=7)).k == 1


def test_reduce_cusp_times_unit():
    h = P("(1 + x)*(x^3 + q1*x + p1)", order=7)
    nf = reduce_to_preliminary(h)
    assert nf.k == 2
    assert [str(r) for r in nf.R] == ["p1", "q1"]
    assert all_true(verify_preliminary(h, nf))
    # the cusp data survives: {R0, R1}(0) != 0 on the orbit chart
    cls = classify_section(nf.section())
    assert (cls.k, cls.l) == (2, 1)


def test_reduce_idempotent():
    h = P("x^3 + (q1 + y*p1)*x + p1 + y + y*q1^2", order=7)
    nf = reduce_to_preliminary(h)
    assert nf.transform.is_identity()
    assert nf.section() == h.truncate(nf.order)
    again = reduce_to_preliminary(nf.section())
    assert again.R == nf.R


def test_reduce_rejects_non_section_class():
    with pytest.raises(ClassMismatch):
        reduce_to_preliminary(P("x^2 + y + p1^2"))


@given(seeds)
@settings(max_examples=12)
def test_reduce_random(seed):
    rng = random.Random(seed)
    k, l = [(1, 1), (2, 1), (1, 2)][seed % 3]
    h, _ = random_section(k, l, 1, 6, rng)
    nf = reduce_to_preliminary(h, verify=False)
    assert nf.k == k and all_true(verify_preliminary(h, nf))
    cls = classify_section(nf.section())
    assert (cls.k, cls.l) == (k, l)


@given(seeds)
@settings(max_examples=6)
def test_reduce_disguised_keeps_bracket(seed):
    rng = random.Random(seed)
    h = disguise(P("x^3 + q1*x + p1", order=6), rng)[0]
    nf = reduce_to_preliminary(h)
    R0, R1 = nf.R

    assert bracket(R0, R1).eval0() != 0


# -- A1 ---------------------------------------------------------------------------------

def test_A1_examples():
    a = reduce_A1(P("x^2 + y + p1^2 + q1^2"))
    assert str(a.psi) == "p1^2 + q1^2" and str(a.phi) == "1"
    b = reduce_A1(P("x^2 + 2*y + p1*q1"))
    assert str(b.psi) == "p1*q1" and str(b.phi) == "2"
    assert b.signature == signature([[0, 1], [1, 0]])


def test_A1_rejects_degenerate():
    # dh(0) = 0: not even a hypersurface germ
    with pytest.raises(InvalidSection):
        reduce_A1(P("x^2 + y*p1"))
    with pytest.raises(ClassMismatch):
        reduce_A1(P("x^2 + y + p1"))


@given(seeds)
@settings(max_examples=6)
def test_A1_signature_invariant(seed):
    rng = random.Random(seed)
    h = random_A1_section(1, 5, rng)
    base = reduce_A1(h)
    psi = random_isotropy_symplectomorphism(1, 5, rng)
    moved = reduce_A1(compose(h, list(psi.components)).truncate(5))
    assert base.phi.eval0() != 0 and moved.signature == base.signature
    assert list(moved.charpoly) == list(base.charpoly)
