"""Seeded random jets, maps and sections for the property tests and ``verify``.

Every generator takes a ``random.Random`` (or a seed) and draws
coefficients from a small set of rationals, so runs are reproducible
and arithmetic stays cheap.  Maps that are meant to be symplectic or to
preserve ``f = y`` check themselves before they are returned.
"""

import random
from fractions import Fraction
from itertools import combinations_with_replacement

from .classify import assemble_prepared, classify_section
from .errors import ConsistencyError, GenericityError, HamsecError
from .forms import FormJet, d, pullback, standard_symplectic
from .jets import Chart, DiffeoJet, Jet
from .poisson import hamiltonian_field, lie_series
from .whitney import MapJet, reduce_R_omega, whitney_classify

__all__ = [
    "make_rng", "rand_rational", "random_poly", "random_unit",
    "random_isotropy_symplectomorphism", "random_reduced_symplectomorphism",
    "random_whitney_map", "random_section", "random_A1_section", "random_closed_form",
    "section_template", "disguise", "disguise_exact", "transform_section", "compose_all",
]

_NUMS = (-3, -2, -1, 1, 2, 3)
_DENS = (1, 1, 2, 3)


def make_rng(seed):
    return seed if isinstance(seed, random.Random) else random.Random(seed)


def rand_rational(rng, nonzero=True):
    num = rng.choice(_NUMS) if nonzero else rng.choice(_NUMS + (0,))
    return Fraction(num, rng.choice(_DENS))


def _monomials(names, deg):
    return list(combinations_with_replacement(names, deg))


def random_poly(chart, order, rng, lo=1, hi=None, terms=3, names=None):
    """Sparse random polynomial with ``terms`` monomials per degree in ``lo..hi``.

    ``names`` restricts the variables used (all chart variables by default).
    """
    hi = order if hi is None else min(hi, order)
    names = list(chart.names) if names is None else list(names)
    coeffs = {}
    for deg in range(lo, hi + 1):
        mons = _monomials(names, deg)
        for mono in rng.sample(mons, min(terms, len(mons))):
            exp = [0] * chart.dim
            for v in mono:
                exp[chart.index[v]] += 1
            coeffs[tuple(exp)] = coeffs.get(tuple(exp), 0) + rand_rational(rng)
    return Jet.from_dict(chart, coeffs, order)


def random_unit(chart, order, rng, terms=2, hi=2):
    return Jet.const(chart, order, rand_rational(rng)) + random_poly(chart, order, rng, 1, hi, terms)


# -- symplectic maps --------------------------------------------------------------

def _flow_all(comps, G):
    Z = hamiltonian_field(G)
    return [lie_series(Z, c) for c in comps]


def _quadratic_generators(chart, order, rng):
    """Nilpotent quadratic Hamiltonians: p-shears, q-shears and, on the
    full chart, ``y * l(p, q)`` and ``y^2``.  All are free of ``x``."""
    n = chart.n
    ps = [f"p{i}" for i in range(1, n + 1)]
    qs = [f"q{i}" for i in range(1, n + 1)]
    gens = []
    for block in (ps, qs):
        G = Jet.zero(chart, order)
        for a, b in rng.sample(_monomials(block, 2), min(2, len(_monomials(block, 2)))):
            G = G + Jet.var(chart, a, order) * Jet.var(chart, b, order) * rand_rational(rng)
        gens.append(G)
    if chart.kind == "full":
        y = Jet.var(chart, "y", order)
        v = rng.choice(ps + qs)
        gens.append(y * Jet.var(chart, v, order) * rand_rational(rng))
        gens.append(y * y * rand_rational(rng))
    rng.shuffle(gens)
    return gens


def _check_symplectic(phi, N, preserve_y):
    ch = phi.source
    om = standard_symplectic(ch, N + 1)
    if not (pullback(phi, om) - om).truncate(N - 1).is_zero():
        raise ConsistencyError("random map failed its symplectic self-check")
    if preserve_y and not phi["y"].truncate(N).equal_to_order(Jet.var(ch, "y", N), N):
        raise ConsistencyError("random map does not preserve y")


def _random_symplecto(chart, N, rng, flows, hi, check, y_free):
    M = N + 1
    comps = list(Jet.coords(chart, M))
    for G in _quadratic_generators(chart, M + 1, rng):
        comps = _flow_all(comps, G)
    names = [v for v in chart.names if v != "x"] if chart.kind == "full" else None
    for _ in range(rng.randint(*flows)):
        G = random_poly(chart, M + 1, rng, 3, hi, terms=2, names=names)
        comps = _flow_all(comps, G)
    phi = DiffeoJet(comps, symplectic=True, preserves_f=chart.kind == "full" or None)
    if check:
        _check_symplectic(phi, N, chart.kind == "full")
    return phi


def random_isotropy_symplectomorphism(n, N, rng, flows=(2, 4), hi=3, check=True):
    """Random symplectomorphism of the full chart preserving ``f = y``.

    Composed from nilpotent quadratic flows (a linear map) and 2 to 4
    time-one flows of Hamiltonians ``G(y, p, q)`` in the cube of the
    maximal ideal (cubic by default; ``hi`` raises the top degree).
    Since ``{G, y} = dG/dx = 0`` every factor fixes ``y``.
    Components have order ``N + 1``; the pullback residual of
    ``dx^dy + dp^dq`` and the ``y`` component are checked before return.
    """
    rng = make_rng(rng)
    return _random_symplecto(Chart.full(n), N, rng, flows, hi, check, True)


def random_reduced_symplectomorphism(n, N, rng, flows=(1, 3), hi=3, check=True):
    """Random symplectomorphism of ``(R^2n, dp^dq)``, order ``N + 1``."""
    rng = make_rng(rng)
    return _random_symplecto(Chart.reduced(n), N, rng, flows, hi, check, False)


def compose_all(jets, phi):
    return [j.compose(phi) for j in jets]


# -- Whitney maps ----------------------------------------------------------------------

def _in_ideal(chart, N, rng, i, lo=2, hi=3):
    """Random element of ``m_i`` with terms of degree ``lo..hi``."""
    n = chart.n
    gens = []
    for j in range(1, n + 1):
        gens += [f"q{j}", f"p{j}"]
    out = Jet.zero(chart, N)
    for g in rng.sample(gens[:i], min(2, i)):
        out = out + Jet.var(chart, g, N) * random_poly(chart, N, rng, lo - 1, hi - 1, terms=1)
    return out


def random_whitney_map(n, s, N, rng, disguise_map=True, tries=50):
    """Random map of type ``S_s`` satisfying (a)-(c) and independent ``r_{1,j}``.

    Built in the symplectic normal form with random moduli and then moved
    by a random symplectomorphism of the source.
    """
    rng = make_rng(rng)
    ch = Chart.reduced(n)
    hat = [v for v in ch.names if v != "q1"]
    for _ in range(tries):
        q1 = Jet.var(ch, "q1", N)
        psi = random_unit(ch, N, rng, terms=2, hi=2)
        r1 = psi * q1 ** (s + 1)
        for j in range(s):
            lin = Jet.zero(ch, N)
            for v in rng.sample(hat, min(2, len(hat))):
                lin = lin + Jet.var(ch, v, N) * rand_rational(rng)
            r1j = lin + random_poly(ch, N, rng, 2, 3, terms=1, names=hat)
            r1 = r1 + (r1j * q1 ** j if j else r1j)
        comps = [Jet.var(ch, "p1", N), r1.truncate(N)]
        for m in range(1, n):
            comps.append(Jet.var(ch, f"p{m + 1}", N) + _in_ideal(ch, N, rng, 2 * m))
            odd = Jet.var(ch, f"q{m + 1}", N) * random_unit(ch, N, rng, terms=1, hi=1)
            comps.append(odd + _in_ideal(ch, N, rng, 2 * m + 1))
        r = MapJet([c.truncate(N) for c in comps])
        if disguise_map:
            phi = random_reduced_symplectomorphism(n, N, rng)
            r = MapJet([c.compose(phi).truncate(N) for c in r])
        cls = whitney_classify(r)
        if not (cls.whitney and cls.s == s):
            continue
        if s and not _independent_after_reduction(r):
            continue
        return r
    raise GenericityError(f"could not draw a Whitney map with s={s}", "draw")


def _independent_after_reduction(r):
    try:
        mod, _ = reduce_R_omega(r)
    except HamsecError:
        return False
    return mod.independent


# -- sections -----------------------------------------------------------------------

def section_template(k, l, n, N, rng):
    """Coefficients ``R_0..R_{k-1}`` (orbit chart) shaped after the templates.

    The associated map is a random Whitney map of the index required by
    ``(k, l)`` and ``g``, ``phi_i`` are random.
    """
    from .moduli import required_s, theorem_for
    thm = theorem_for(k, l, n)
    if thm is None or thm == 7:
        raise ValueError(f"no template for S({k},{l}) at n = {n}")
    if thm == 6 and l > k:
        # Z_h^(k+1) f(0) carries -(k+1)! g'(0)^k, so l <= k unless it cancels
        raise ValueError(f"S({k},{l}) with g'(0) != 0 needs l <= k")
    orbit = Chart.orbit(n)
    reduced = Chart.reduced(n)
    s = required_s(k, l)
    # the map is moved undisguised; disguise happens on the section
    r = random_whitney_map(n, s, N, rng, disguise_map=False)
    r = [c.to_chart(orbit, N) for c in r]
    y = Jet.var(orbit, "y", N)

    def tail():
        return random_poly(orbit, N, rng, 0, 1, terms=1)

    if thm == 4:
        R = [r[i] + tail() * y for i in range(2 * n)]
        R.append(y * rand_rational(rng) + random_poly(orbit, N, rng, 2, 3, terms=2))
        return [x.truncate(N) for x in R]
    if thm == 5:
        g = y * y * rand_rational(rng) + y ** 3 * rand_rational(rng, nonzero=False)
    else:
        g = y * rand_rational(rng) + y * y * rand_rational(rng, nonzero=False)
    top = 2 * n - k
    R0 = g + r[0]
    for j in range(1, top + 1):
        R0 = R0 + r[k - 1 + j] * y ** j
    R0 = R0 + tail() * y ** (top + 1)
    R = [R0] + [r[i] + tail() * y for i in range(1, k)]
    return [x.truncate(N) for x in R]


def disguise(h, rng, N=None):
    """``u * (h o Psi)`` for a random unit and isotropy symplectomorphism."""
    rng = make_rng(rng)
    N = h.order if N is None else N
    psi = random_isotropy_symplectomorphism(h.chart.n, N, rng)
    u = random_unit(h.chart, N, rng)
    return (u * h.compose(psi)).truncate(N), psi, u


def random_section(k, l, n, N, rng, disguised=True, tries=30, check_moduli=True):
    """Random section of class ``S(k,l)`` inside the template's open set.

    Returns ``(h, h0)``: the disguised section and the template section
    it was built from (equal when ``disguised`` is False).  With
    ``check_moduli`` the template section must also pass every moduli
    genericity check, which costs a full reduction.
    """
    from .moduli import assemble_moduli
    rng = make_rng(rng)
    for _ in range(tries):
        R = section_template(k, l, n, N, rng)
        h0 = assemble_prepared(R, k, N)
        cls = classify_section(h0)
        if (cls.tag, cls.k, cls.l) != ("S", k, l):
            continue
        if check_moduli:
            try:
                assemble_moduli(h0)
            except GenericityError:
                continue
        h = disguise(h0, rng)[0] if disguised else h0
        return h, h0
    raise GenericityError(f"could not draw a section of class S({k},{l})", "draw")


def random_A1_section(n, N, rng, disguised=False):
    """``x^2 + y u + psi`` with ``u(0) != 0`` and Morse ``psi`` in ``m^2``."""
    rng = make_rng(rng)
    full = Chart.full(n)
    names = [v for v in full.names if v not in ("x", "y")]
    while True:
        psi = Jet.zero(full, N)
        for i, v in enumerate(names):
            psi = psi + Jet.var(full, v, N) ** 2 * rand_rational(rng)
            if i:
                psi = psi + Jet.var(full, v, N) * Jet.var(full, names[i - 1], N) * rand_rational(rng, False)
        psi = psi + random_poly(full, N, rng, 3, 4, terms=2, names=names)
        u = random_unit(full, N, rng, terms=2, hi=2)
        x = Jet.var(full, "x", N)
        h = (x * x + Jet.var(full, "y", N) * u + psi).truncate(N)
        if classify_section(h).tag == "A1":
            break
    return disguise(h, rng)[0] if disguised else h


def random_closed_form(n, N, rng, terms=2):
    """``dp^dq + d(beta)`` on the orbit chart with ``beta`` vanishing to order 2."""
    rng = make_rng(rng)
    orbit = Chart.orbit(n)
    beta = FormJet(orbit, 1, {(v,): random_poly(orbit, N + 1, rng, 2, 3, terms=terms)
                              for v in orbit.names}, N + 1)
    return standard_symplectic(orbit, N) + d(beta)


def transform_section(h, psi, u, k, N):
    """``u * (h o Psi)`` kept in the grading the preliminary reduction reads.

    ``h`` and ``u`` are read as exact polynomials and ``Psi`` must not
    move ``x`` into the other coordinates (true for the isotropy maps
    drawn here, whose Hamiltonians are free of ``x``).  The product is
    truncated at weighted order ``(k+1)(N+1)+k`` with ``wt x = 1`` and
    ``wt y, p, q = k + 1`` instead of at ordinary order ``N``, so that
    ``reduce_to_preliminary(result, N)`` sees exactly the transformed
    germ.  The returned jet lives on the standard chart with whatever
    ordinary order its terms need.
    """
    from .normalize import _weighted_order
    full = h.chart
    Cw = full.section_weights(k)
    W = _weighted_order(k, N)
    if any(c.degree_in("x") > 0 for v, c in zip(full.names, psi) if v != "x"):
        raise ValueError("transform_section needs a map that keeps x out of y, p, q")
    sub = DiffeoJet([c.to_chart(Cw, W, exact=True) for c in psi])
    hw = h.to_chart(Cw, W, exact=True).compose(sub)
    out = (u.to_chart(Cw, W, exact=True) * hw).truncate(W)
    poly = out.poly().project_to_context(full.ctx)
    top = max((sum(e) for e, _ in poly.terms()), default=0)
    return Jet.from_poly(full, poly, max(top, N))


def disguise_exact(h, k, N, rng):
    """Like :func:`disguise` but through :func:`transform_section`.

    Returns ``(h2, psi, u)``.
    """
    rng = make_rng(rng)
    psi = random_isotropy_symplectomorphism(h.chart.n, N, rng)
    u = random_unit(h.chart, N, rng)
    return transform_section(h, psi, u, k, N), psi, u
