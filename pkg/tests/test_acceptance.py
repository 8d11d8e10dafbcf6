"""Acceptance criteria, one test each.

Every test prints a single ``criterion <i>: PASS|FAIL ...`` line (shown
even under output capture) and then asserts.  Sizes and tolerances are
the stated ones; where a comparison order had to be chosen, the line
says which.
"""

import random
import time

import pytest

from hamsec.classify import classify_section, is_morse
from hamsec.forms import pullback, standard_symplectic
from hamsec.generators import (disguise_exact, random_A1_section, random_closed_form,
                               random_isotropy_symplectomorphism, random_poly, random_section,
                               random_whitney_map)
from hamsec.jets import Chart, Jet, compose
from hamsec.moduli import assemble_moduli, equivalence_between
from hamsec.normalize import moser_darboux_orbit, reduce_A1, reduce_to_preliminary, verify_preliminary
from hamsec.parsing import parse_polynomial
from hamsec.poisson import bracket, first_nonvanishing, flow_tangency_oracle
from hamsec.suite import run_invariance
from hamsec.whitney import is_whitney_normal_form, reduce_R_omega


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok
    return emit


def rng_for(tag, i):
    return random.Random(f"acceptance:{tag}:{i}")


# 1 -------------------------------------------------------------------------------

def test_criterion_1_bracket_algebra(verdict):
    full = Chart.full(1)
    rng = rng_for(1, 0)
    triples = [[random_poly(full, 5, rng, 1, 5, terms=3) for _ in range(3)] for _ in range(500)]
    bad = []
    start = time.perf_counter()
    for i, (a, b, c) in enumerate(triples):
        ab = bracket(a, b)
        if ab != -bracket(b, a):
            bad.append((i, "antisymmetry"))
        lhs = bracket(a, b * c)
        rhs = ab * c + b * bracket(a, c)
        N = min(lhs.order, rhs.order)
        if not lhs.equal_to_order(rhs, N):
            bad.append((i, "Leibniz"))
        jac = bracket(a, bracket(b, c)) + bracket(b, bracket(c, a)) + bracket(c, ab)
        if not jac.is_zero():
            bad.append((i, "Jacobi"))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    verdict(1, ok, f"500 triples, {len(bad)} failures, {elapsed:.2f} s (< 10 s)")
    assert ok, bad[:5]


# 2 -------------------------------------------------------------------------------

ORACLE_CLASSES = [(1, 1), (2, 1), (3, 1), (1, 2), (1, 3), (2, 2)]


def test_criterion_2_oracle_equivalence(verdict):
    bad = []
    for k, l in ORACLE_CLASSES:
        for i in range(200):
            h, _ = random_section(k, l, 1, 6, rng_for(f"2:{k}{l}", i), check_moduli=False)
            y = Jet.var(h.chart, "y", h.order)
            fk, bk = flow_tangency_oracle(y, h, 5), first_nonvanishing(y, h)[0]
            fl, bl = flow_tangency_oracle(h, y, 5), first_nonvanishing(h, y)[0]
            if not (fk == bk == k and fl == bl == l):
                bad.append((k, l, i, fk, bk, fl, bl))
    ok = not bad
    verdict(2, ok, f"200 pairs x {len(ORACLE_CLASSES)} classes (n=1), k and l, "
                   f"{len(bad)} disagreements")
    assert ok, bad[:5]


# 3 -------------------------------------------------------------------------------

def test_criterion_3_melrose_and_cusp(verdict):
    full = Chart.full(1)
    runs = []
    for _ in range(3):
        mel = classify_section(parse_polynomial("x^2+y+p1", full, 6))
        w = dict(mel.witnesses)
        runs.append((mel.name, w["{f,h}_1(0)"], w["{h,f}_1(0)"]))
    cusp = classify_section(parse_polynomial("x^3+q1*x+p1", full, 6))
    ok = all(r == ("S(1,1)", 2, -2) for r in runs) and (cusp.k, cusp.l) == (2, 1)
    verdict(3, ok, f"Melrose {runs[0][0]} witnesses {runs[0][1]}, {runs[0][2]} "
                   f"(stable over 3 runs); cusp {cusp.name}")
    assert ok


# 4 -------------------------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2])
def test_criterion_4_preliminary_pipeline(verdict, n):
    N = 10
    lines = []
    bad = []
    slow = []
    for k, l in [(1, 1), (2, 1), (1, 2)]:
        t_reduce = t_check = 0.0
        for i in range(100):
            h, _ = random_section(k, l, n, N, rng_for(f"4:{n}:{k}{l}", i), check_moduli=False)
            t0 = time.perf_counter()
            nf = reduce_to_preliminary(h, N=N, verify=False)
            t1 = time.perf_counter()
            checks = verify_preliminary(h, nf)
            t_check += time.perf_counter() - t1
            t_reduce += t1 - t0
            if nf.k != k or not all(checks.values()):
                bad.append((k, l, i, [c for c, v in checks.items() if not v]))
        if t_reduce >= 60:
            slow.append((k, l))
        lines.append(f"S({k},{l}) {t_reduce:.1f} s (+{t_check:.1f} s exact checks)")
    ok = not bad and not slow
    verdict(4, ok, f"n={n}, N={N}, 100 sections per class: residual 0, T symplectic and "
                   f"f-preserving at N; {len(bad)} failures; " + "; ".join(lines))
    assert ok, (bad[:5], slow)


# 5 -------------------------------------------------------------------------------

def test_criterion_5_moser(verdict):
    bad = []
    for i in range(100):
        n = 1 + i % 2
        om = random_closed_form(n, 8, rng_for(5, i))
        orbit = om.chart
        phi = moser_darboux_orbit(om)
        K = om.order
        if phi["y"].truncate(K) != Jet.var(orbit, "y", K):
            bad.append((i, "y moved"))
        if pullback(phi, standard_symplectic(orbit, K + 1)).truncate(K) != om.truncate(K):
            bad.append((i, "pullback"))
    ok = not bad
    verdict(5, ok, f"100 closed forms (n=1,2, N=8): pullback = omega_hat exactly, y fixed; "
                   f"{len(bad)} failures")
    assert ok, bad[:5]


# 6 -------------------------------------------------------------------------------

def test_criterion_6_whitney(verdict):
    N = 7
    bad = []
    for s in (0, 1, 2):
        for i in range(50):
            r = random_whitney_map(2, s, N, rng_for(f"6:{s}", i))
            mod, phi = reduce_R_omega(r)
            om = standard_symplectic(phi.source, N + 1)
            problems = is_whitney_normal_form(mod.normal_form, s)
            if mod.s != s:
                problems.append("s")
            if pullback(phi, om).truncate(N) != om.truncate(N):
                problems.append("not symplectic")
            if not r.compose(phi).equal_to_order(mod.normal_form, N):
                problems.append("r o phi != normal form")
            again, phi2 = reduce_R_omega(mod.normal_form)
            if not phi2.is_identity(N) or not again.equal_to_order(mod, mod.valid_order):
                problems.append("re-reduction not identity")
            if problems:
                bad.append((s, i, problems))
    ok = not bad
    verdict(6, ok, f"50 maps per s in (0,1,2), n=2, N={N}: shape, symplectic at N, "
                   f"idempotent; {len(bad)} failures")
    assert ok, bad[:5]


# 7 -------------------------------------------------------------------------------

def test_criterion_7_moduli_invariance(verdict):
    N = 8
    results = run_invariance(2, N, 100, seed=7)
    fails = [r.to_json() for r in results if not r.ok]
    orders = sorted({r.order for r in results})
    ok = not fails and len(results) == 100
    verdict(7, ok, f"100 triples over S(1,1), S(2,1), S(1,2), S(2,2), n=2, N={N}; compared "
                   f"at min(N-2, valid order) = {orders}; {len(fails)} failures")
    assert ok, fails[:3]


# 8 -------------------------------------------------------------------------------

def test_criterion_8_sufficiency(verdict):
    N = 10
    bad = []
    orders = set()
    classes = [(1, 1), (2, 1), (1, 2), (2, 2)]
    for i in range(25):
        k, l = classes[i % 4]
        rng = rng_for(8, i)
        h1, _ = random_section(k, l, 1, N, rng)
        h2, _, _ = disguise_exact(h1, k, N, rng)
        m1, m2 = assemble_moduli(h1), assemble_moduli(h2, N=N)
        v = min(m1.valid_order, m2.valid_order)
        orders.add(v)
        C, w = equivalence_between(m1, m2, v)
        full = h1.chart
        problems = []
        if (w * compose(h1.truncate(v), list(C.components))).truncate(v) != h2.truncate(v):
            problems.append("residual")
        om = standard_symplectic(full, v)
        if pullback(C, om).truncate(v - 1) != om.truncate(v - 1):
            problems.append("not symplectic")
        if C["y"].truncate(v) != Jet.var(full, "y", v):
            problems.append("y moved")
        if problems:
            bad.append((i, k, l, problems))
    ok = not bad
    verdict(8, ok, f"25 pairs (n=1, N={N}) with equal moduli: h2 = w (h1 o C) with residual 0 "
                   f"at the valid order {sorted(orders)}, C symplectic and f-preserving; "
                   f"{len(bad)} failures")
    assert ok, bad[:5]


# 9 -------------------------------------------------------------------------------

def test_criterion_9_typicality(verdict):
    # x^(k+1) + p1 + x q1^l: Z_h keeps x = 0 and y ~ t^(l+1), so the class is S(k,l)
    bad = []
    cells = 0
    for n in (1, 2):
        top = 2 * n + 3
        full = Chart.full(n)
        for k in range(1, top + 1):
            for l in range(1, top + 1):
                h = parse_polynomial(f"x^{k + 1} + p1 + x*q1^{l}", full, top + 3)
                cls = classify_section(h)
                cells += 1
                expect = k + l - 1 <= 2 * n + 1
                if (cls.tag, cls.k, cls.l) != ("S", k, l) or cls.typical != expect:
                    bad.append((n, k, l, cls.name, cls.typical))
    ok = not bad
    verdict(9, ok, f"{cells} grid cells (n=1,2; k,l <= 2n+3): atypical exactly when "
                   f"k+l-1 > 2n+1; {len(bad)} mismatches")
    assert ok, bad[:5]


# 10 ------------------------------------------------------------------------------

def test_criterion_10_A1(verdict):
    N = 5
    bad = []
    for i in range(50):
        n = 1 + i % 2
        rng = rng_for(10, i)
        h = random_A1_section(n, N, rng)
        base = reduce_A1(h)
        if base.phi.eval0() == 0 or not is_morse(base.hessian):
            bad.append((i, "base"))
            continue
        for j in range(20):
            psi = random_isotropy_symplectomorphism(n, N, rng)
            moved = reduce_A1(compose(h, list(psi.components)).truncate(N))
            if moved.signature != base.signature or moved.phi.eval0() == 0:
                bad.append((i, j))
    ok = not bad
    verdict(10, ok, f"50 Morse perturbations (n=1,2) x 20 isotropy maps: phi(0) != 0, psi Morse, "
                    f"signature invariant; {len(bad)} failures")
    assert ok, bad[:5]
