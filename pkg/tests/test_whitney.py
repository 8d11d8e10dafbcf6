import random

import pytest
from hypothesis import given, settings, strategies as st

from hamsec.errors import GenericityError
from hamsec.forms import pullback, standard_symplectic
from hamsec.generators import random_reduced_symplectomorphism, random_whitney_map
from hamsec.jets import Chart, DiffeoJet, Jet, compose, invert
from hamsec.parsing import parse_map, parse_polynomial
from hamsec.whitney import (MapJet, ideal_generators, ideal_membership, is_whitney_normal_form,
                            r1j_independent, reduce_R, reduce_R_omega, whitney_classify)

seeds = st.integers(0, 10**6)


def M(text, n=1, order=6):
    return MapJet(parse_map(text, Chart.reduced(n), order))


def R(text, n=1, order=6):
    return parse_polynomial(text, Chart.reduced(n), order)


def is_symplectic(phi, N):
    ch = phi.source
    return pullback(phi, standard_symplectic(ch, N + 1)).truncate(N) == standard_symplectic(ch, N)


# -- classification ---------------------------------------------------------------

def test_identity_is_S0():
    wc = whitney_classify(MapJet.identity(2, 5))
    assert wc.s == 0 and wc.whitney and wc.d


def test_fold_map_n2():
    wc = whitney_classify(M("p1; q1^2 + p2; p2; q2", n=2))
    assert wc.s == 1 and (wc.a, wc.b, wc.c) == (True, True, True)
    assert dict(wc.witnesses)["{r0,r1}_1(0)"] == 2


def test_cusp_map_n1_flags():
    # brackets -3 q1^2, 6 q1: s = 2 but d{r0,r1}_0(0) = 0 breaks the rank
    # condition on dr0, d{r0,r1}_0, d{r0,r1}_1
    wc = whitney_classify(M("p1; q1^3"))
    assert wc.s == 2
    assert not wc.b and wc.c
    assert not wc.whitney


def test_undetermined():
    wc = whitney_classify(M("p1; p1^2", order=4))
    assert not wc.determined and not wc.whitney


@given(seeds, st.sampled_from([0, 1]))
@settings(max_examples=6)
def test_classify_invariant_under_symplectomorphisms(seed, s):
    rng = random.Random(seed)
    r = random_whitney_map(2, s, 6, rng, disguise_map=False)
    phi = random_reduced_symplectomorphism(2, 6, rng)
    a, b = whitney_classify(r), whitney_classify(r.compose(phi).truncate(6))
    assert (a.s, a.a, a.b, a.c) == (b.s, b.a, b.b, b.c)


# -- ideals -----------------------------------------------------------------------

def test_ideal_generators_order():
    assert ideal_generators(2, 3) == ("q1", "p1", "q2")


def test_ideal_membership_examples():
    cert = ideal_membership(R("q1*p1"), 1)
    assert cert.member and str(cert.cofactors["q1"]) == "p1"
    bad = ideal_membership(R("p2", n=2), 2)
    assert not bad.member
    ch = Chart.reduced(2)
    assert [tuple(e) for e in bad.offending] == [tuple(1 if v == "p2" else 0 for v in ch.names)]
    good = ideal_membership(R("q2^3 + q1", n=2), 3)
    assert good.member
    assert good.recombine(ch, 6) == R("q2^3 + q1", n=2)


# -- ordinary reduction -------------------------------------------------------------

def test_reduce_R_identity():
    nf, phi, valid = reduce_R(MapJet.identity(1, 5))
    assert nf == MapJet.identity(1, 5)


def test_reduce_R_complete_square():
    nf, phi, valid = reduce_R(M("p1; q1^2 + p1*q1", order=5))
    assert str(nf[0]) == "p1"
    assert str(nf[1]) == "-1/4*p1^2 + q1^2"


def test_reduce_R_n2():
    nf, phi, valid = reduce_R(M("p1; q1^2 + p2; p2; q2", n=2))
    assert [str(c) for c in nf] == ["p1", "q1^2 + p2", "p2", "q2"]


def test_reduce_R_carries_map():
    r = M("p1 + q1^2; q1^2 + p1*q1 + p1^2", order=6)
    nf, phi, valid = reduce_R(r)
    moved = r.compose(phi)
    assert moved.equal_to_order(nf, valid)


# -- symplectic reduction -----------------------------------------------------------

def test_reduce_R_omega_identity():
    mod, phi = reduce_R_omega(MapJet.identity(2, 5))
    assert mod.s == 0 and str(mod.psi) == "1"
    assert [str(j) for j in mod.odd] == ["q2"]
    assert all(j.is_zero() for j in mod.even_tilde)


def test_reduce_R_omega_n2_fold():
    mod, phi = reduce_R_omega(M("p1; q1^2 + p2; p2; q2", n=2))
    assert (mod.s, str(mod.psi), [str(j) for j in mod.r1j]) == (1, "1", ["p2"])
    assert mod.independent and phi.is_identity()


def test_flags_do_not_imply_r1j_independence():
    r = M("p1; q1^2")
    assert whitney_classify(r).whitney
    mod, _ = reduce_R_omega(r)
    assert mod.r1j[0].is_zero() and not r1j_independent(mod.r1j)


def test_reduce_R_omega_rejects_flag_failure():
    with pytest.raises(GenericityError):
        reduce_R_omega(M("p1; q1^3"))


@given(seeds, st.sampled_from([(1, 0), (1, 1), (2, 0), (2, 1)]))
@settings(max_examples=10)
def test_reduce_R_omega_random(seed, ns):
    n, s = ns
    N = 6
    rng = random.Random(seed)
    r = random_whitney_map(n, s, N, rng)
    mod, phi = reduce_R_omega(r)
    assert mod.s == s
    assert is_whitney_normal_form(mod.normal_form, s) == []
    assert is_symplectic(phi, N)
    assert r.compose(phi).equal_to_order(mod.normal_form, N)
    again, phi2 = reduce_R_omega(mod.normal_form)
    assert phi2.is_identity(N)
    assert again.equal_to_order(mod, mod.valid_order)


@given(seeds, st.sampled_from([0, 1]))
@settings(max_examples=6)
def test_moduli_invariance(seed, s):
    N = 7
    rng = random.Random(seed)
    r = random_whitney_map(2, s, N, rng)
    psi = random_reduced_symplectomorphism(2, N, rng)
    a, _ = reduce_R_omega(r)
    b, _ = reduce_R_omega(r.compose(psi).truncate(N))
    order = min(N - 2, a.valid_order, b.valid_order)
    assert a.equal_to_order(b, order)


@given(seeds)
@settings(max_examples=5)
def test_completeness_direction(seed):
    # r and r o psi share their moduli; the composed reducing maps carry one to the other
    N = 6
    rng = random.Random(seed)
    r = random_whitney_map(2, 1, N, rng)
    psi = random_reduced_symplectomorphism(2, N, rng)
    r2 = r.compose(psi).truncate(N)
    m1, phi1 = reduce_R_omega(r)
    m2, phi2 = reduce_R_omega(r2)
    v = min(m1.valid_order, m2.valid_order)
    assert m1.equal_to_order(m2, v)
    C = DiffeoJet([compose(c.truncate(v), invert(phi2.truncate(v))) for c in phi1])
    assert is_symplectic(C, v - 1)
    assert r.compose(C).equal_to_order(r2, v)


@given(seeds)
@settings(max_examples=5)
def test_ordinary_and_symplectic_agree(seed):
    rng = random.Random(seed)
    r = random_whitney_map(2, 1, 6, rng)
    mod, _ = reduce_R_omega(r)
    nf, _, _ = reduce_R(r)
    assert mod.independent
    r10 = nf[1].coefficient_in("q1", 0)
    assert r1j_independent([r10])
