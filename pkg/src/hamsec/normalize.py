"""Reduction of a section to the preliminary normal form.

Pipeline for ``H in S(k)`` (and for ``A1`` with ``k = 1``)::

    weierstrass_prepare   u h = x^(k+1) + sum_{i<=k} R_i x^i
    kill_top_coefficient  x -> x - R_k/(k+1), giving omega = dx^dy + omega_hat
    moser_darboux_orbit   (y, p, q) -> (y, Phi(y, p, q)) with Phi^* dp^dq = omega_hat

The composite ``T`` is a symplectomorphism of ``dx^dy + dp^dq`` fixing
``y``; the result satisfies ``u (h o T) = x^(k+1) + sum_{i<k} R_i x^i``.

Weierstrass preparation reads ``h`` as an exact polynomial and lifts
``h = P E`` degree by degree in ``(y, p, q)`` while staying polynomial
in ``x``; an input of order ``N`` gives ``R_i`` valid through degree
``N + 1``.
"""

from dataclasses import dataclass, field
from math import comb

import flint

from .classify import assemble_prepared, classify_section, is_morse
from .errors import ClassMismatch, ConsistencyError, FormError, GenericityError, PrecisionError
from .forms import (FormJet, homotopy_primitive, is_closed, lie_series_form, pullback,
                    standard_symplectic)
from .jets import Chart, DiffeoJet, Jet, as_fmpq, compose, divide_by_ideal_y
from .linalg import signature, standard_J, symplectic_basis
from .poisson import lie_series

__all__ = [
    "PreliminaryNormalForm", "A1NormalForm", "weierstrass_prepare", "kill_top_coefficient",
    "moser_darboux_orbit", "reduce_to_preliminary", "reduce_A1", "verify_preliminary",
]


@dataclass
class PreliminaryNormalForm:
    """``unit * (h o transform) = x^(k+1) + sum_{i<k} R[i] x^i`` to ``order``.

    ``R`` lives on the orbit chart and is valid to ``R[i].order``
    (one more than ``order`` for exact polynomial input).
    """

    k: int
    R: list
    transform: DiffeoJet
    unit: Jet
    order: int
    omega_hat: FormJet = field(default=None, repr=False)
    orbit_map: DiffeoJet = field(default=None, repr=False)
    shift: Jet = field(default=None, repr=False)
    transport: object = field(default=None, repr=False, compare=False)

    def pull(self, g, order=None):
        """``g o transform`` for a full-chart jet ``g``."""
        N = self.order if order is None else order
        if self.transport is not None:
            return self.transport.pull_full(g, self.shift, N)
        return compose(g.truncate(N), self.transform.truncate(N))

    def section(self, order=None):
        """The normal-form section on the full chart."""
        return assemble_prepared(self.R, self.k, self.order if order is None else order)

    def to_json(self):
        from .report import jet_json
        return {
            "k": self.k,
            "order": self.order,
            "R": [jet_json(r) for r in self.R],
            "unit": jet_json(self.unit),
            "transform": {v: jet_json(c) for v, c in zip(self.transform.target.names, self.transform)},
        }


@dataclass
class A1NormalForm:
    """``x^2 + psi(p, q) + phi(y, p, q) y`` with raw (unnormalized) ``psi``."""

    psi: Jet
    phi: Jet
    transform: DiffeoJet
    unit: Jet
    order: int
    hessian: list
    signature: tuple
    charpoly: list

    def to_json(self):
        from .report import jet_json, rat
        return {
            "psi": jet_json(self.psi),
            "phi": jet_json(self.phi),
            "order": self.order,
            "hessian": [[rat(v) for v in row] for row in self.hessian],
            "signature": list(self.signature),
            "charpoly_JH": [rat(v) for v in self.charpoly],
        }


# -- Weierstrass preparation -------------------------------------------------------

def _weighted_order(k, N):
    # weighted degree up to which R_0..R_k through degree N + 1 are determined
    return (k + 1) * (N + 1) + k


def _mod_x(poly, xm):
    """Terms of ``poly`` of ``x``-degree below that of the monomial ``xm``."""
    return divmod(poly, xm)[1]


def _series_inverse_x(e, X, m):
    """``1/e mod x^m`` for a polynomial ``e`` in ``x`` with ``e(0) != 0``."""
    xm = X ** m
    inv = e.context().constant(1 / _constant_term(e))
    prec = 1
    while prec < m:
        prec = min(2 * prec, m)
        inv = _mod_x(inv * (2 - _mod_x(e * inv, xm)), xm)
    return inv


def _constant_term(poly):
    zero = (0,) * poly.context().nvars()
    for exp, c in poly.terms():
        if tuple(exp) == zero:
            return c
    return flint.fmpq(0)


def _hensel_prepare(h, k, D, N):
    """Weierstrass preparation of an exact polynomial, graded by ``(y, p, q)``-degree.

    Writes ``h = P E`` with ``P = x^(k+1) + sum_{i<=k} R_i x^i``.  With
    ``h_d`` the part of ``h`` of degree ``d`` in ``(y, p, q)`` and
    ``h_0 = x^(k+1) e``, degree ``d`` of ``h = P E`` reads
    ``x^(k+1) E_d + e P_d = h_d - sum_{0<i<d} P_i E_(d-i)``, solved by
    ``P_d = (rhs / e) mod x^(k+1)`` and an exact division for ``E_d``.
    Everything stays polynomial in ``x``, so nothing is lost to
    truncation in ``x``.

    Returns ``(P_parts, unit)``: ``P_d`` for ``d = 1..D`` as flint
    polynomials, and ``u = 1/E`` as a jet of ordinary order ``N``.
    """
    ch = h.chart
    ctx = ch.ctx
    xi = ch.index["x"]
    X = ctx.gens()[xi]
    xk = X ** (k + 1)
    buckets = [dict() for _ in range(D + 1)]
    for exp, c in h.terms():
        d = sum(exp) - exp[xi]
        if d <= D:
            buckets[d][tuple(exp)] = c
    H = [ctx.from_dict(bk) for bk in buckets]
    e, r = divmod(H[0], xk)
    if not r.is_zero():
        raise ClassMismatch(f"h(x,0) vanishes to order below {k + 1} in x")
    if _constant_term(e) == 0:
        raise ClassMismatch(f"h(x,0) vanishes to order above {k + 1} in x")
    einv = _series_inverse_x(e, X, k + 1)
    P, E = [xk], [e]
    for d in range(1, D + 1):
        rhs = H[d]
        for i in range(1, d):
            if not P[i].is_zero() and not E[d - i].is_zero():
                rhs = rhs - P[i] * E[d - i]
        Pd = _mod_x(rhs * einv, xk)
        Ed, rem = divmod(rhs - e * Pd, xk)
        if not rem.is_zero():
            raise ConsistencyError("Hensel step left a remainder")
        P.append(Pd)
        E.append(Ed)
    # u = 1/E in the same grading, keeping x-degree <= N - d
    big = _series_inverse_x(e, X, N + 1)
    U = [big]
    for d in range(1, N + 1):
        acc = ctx.from_dict({})
        for j in range(1, d + 1):
            if j < len(E) and not E[j].is_zero() and not U[d - j].is_zero():
                acc = acc + E[j] * U[d - j]
        xm = X ** (N - d + 1)
        U.append(_mod_x(-_mod_x(acc, xm) * big, xm))
    unit = Jet.from_poly(ch, sum(U[1:], U[0]), N)
    return P[1:], unit


def _x_coefficients(P_parts, k, orbit, order, X):
    """Coefficients of ``x^0..x^k`` of ``sum P_d`` as orbit-chart jets.

    ``P_d`` is homogeneous of degree ``d`` in ``(y, p, q)``, so its
    ``x^i`` coefficient is directly the degree-``d`` component.
    """
    zero = orbit.ctx.from_dict({})
    out = []
    for i in range(k + 1):
        comps = [zero] * (order + 1)
        for d, Pd in enumerate(P_parts, 1):
            if d > order or Pd.is_zero():
                continue
            c = _mod_x(divmod(Pd, X ** i)[0], X) if i else _mod_x(Pd, X)
            if not c.is_zero():
                comps[d] = c.project_to_context(orbit.ctx)
        out.append(Jet(orbit, order, comps))
    return out


def _prepare_exact(h, k, N):
    """``(unit, R_0..R_k)``: unit of order ``N``, coefficients of order ``N + 1``."""
    orbit = Chart.orbit(h.chart.n)
    P_parts, unit = _hensel_prepare(h, k, N + 1, N)
    X = h.chart.ctx.gens()[h.chart.index["x"]]
    return unit, _x_coefficients(P_parts, k, orbit, N + 1, X)


def _target_order(h, N):
    if N is None:
        return h.order
    if N > h.order:
        raise PrecisionError(f"target order {N} exceeds the input order {h.order}")
    return N


def weierstrass_prepare(h, k, N=None):
    """Prepare ``h`` with respect to ``x``.

    Parameters
    ----------
    h : Jet
        Section on the standard full chart, read as an exact polynomial.
    k : int
        ``h(x, 0) = x^(k+1) * (unit)``.
    N : int, optional
        Order of the result; defaults to ``h.order``.

    Returns
    -------
    unit : Jet
        Full chart, order ``N``.
    R : list of Jet
        ``R_0..R_k`` on the orbit chart, order ``N + 1``.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> from hamsec.jets import Chart
    >>> u, R = weierstrass_prepare(parse_polynomial("x^3+x^2+x*y+y", Chart.full(1), 5), 1)
    >>> [str(r) for r in R]
    ['y', '0']
    """
    N = _target_order(h, N)
    return _prepare_exact(h, k, N)


# -- shift and the induced quasi-symplectic form ----------------------------------

def _shift_coefficients(R, k):
    """Coefficients of ``P(x - c)`` where ``P = x^(k+1) + sum R_i x^i``, ``c = R_k/(k+1)``."""
    c = R[k].scale(flint.fmpq(1, k + 1))
    full = list(R) + [Jet.const(R[0].chart, R[0].order, 1)]
    negc = -c
    powers = [Jet.const(c.chart, c.order, 1)]
    for _ in range(k + 1):
        powers.append(powers[-1] * negc)
    out = []
    for i in range(k):
        acc = full[i]
        for j in range(i + 1, k + 2):
            acc = acc + (full[j] * powers[j - i]).scale(comb(j, i))
        out.append(acc)
    return out, c


def kill_top_coefficient(R, k, check=True):
    """Remove ``R_k`` by ``x -> x - R_k/(k+1)``.

    Parameters
    ----------
    R : list of Jet
        ``R_0..R_k`` on the orbit chart.

    Returns
    -------
    R_new : list of Jet
        ``k`` coefficients.
    c : Jet
        The shift ``R_k/(k+1)`` (orbit chart).
    omega_hat : FormJet
        ``dp^dq + dy^dc`` on the orbit chart.

    Raises
    ------
    ConsistencyError
        When the pulled-back form does not split as ``dx^dy + omega_hat``.
    """
    if len(R) != k + 1:
        raise ValueError(f"expected {k + 1} coefficients")
    R_new, c = _shift_coefficients(R, k)
    orbit = c.chart
    K = c.order - 1
    dc = {(0, j): c.partial(j).truncate(K) for j in range(1, orbit.dim)}
    omega_hat = standard_symplectic(orbit, K) + FormJet(orbit, 2, dc, K)
    if check:
        full = Chart.full(orbit.n)
        cf = c.to_chart(full, c.order)
        comps = [Jet.var(full, "x", c.order) - cf] + [Jet.var(full, v, c.order) for v in full.names[1:]]
        S = DiffeoJet(comps)
        pulled = pullback(S, standard_symplectic(full, c.order))
        ix = full.index["x"]
        for key, coef in pulled.components.items():
            if ix in key:
                expect = 1 if key == (0, 1) else 0
                if coef.truncate(K) != Jet.const(full, K, expect):
                    raise ConsistencyError(f"dx-component {key} of the shifted form is {coef}")
        rest = FormJet(full, 2, {kk: v for kk, v in pulled.components.items() if ix not in kk}, K)
        # orbit index j is full index j + 1
        lifted = FormJet(full, 2, {tuple(i + 1 for i in key): v.to_chart(full, K)
                                   for key, v in omega_hat.components.items()}, K)
        if rest != lifted:
            raise ConsistencyError("orbit part of the shifted form disagrees")
    if check and not is_closed(omega_hat):
        raise ConsistencyError("omega_hat is not closed")
    return R_new, c, omega_hat


# -- odd-dimensional Darboux by degree-wise Lie steps --------------------------------

def _linear_prenormalization(omega_hat):
    """Linear ``(y, z) -> (y, B z + y d)`` pulling the constant part back to ``dp^dq``."""
    ch = omega_hat.chart
    Om = omega_hat.constant_matrix()
    dim = ch.dim
    m = dim - 1
    Mz = flint.fmpq_mat(m, m)
    beta = flint.fmpq_mat(m, 1)
    for i in range(m):
        beta[i, 0] = Om[0, i + 1]
        for j in range(m):
            Mz[i, j] = Om[i + 1, j + 1]
    if Om.rank() != m:
        raise GenericityError("omega_hat does not have rank 2n at 0", "rank")
    if Mz.rank() != m:
        raise GenericityError("kernel of omega_hat is not transversal to {y = const}", "transversality")
    B = symplectic_basis(Mz)
    dvec = Mz.inv() * beta
    return B, dvec


def _linear_map(chart, order, B, dvec, inverse=False):
    """Components of the linear map (or its inverse) as jets on ``chart``."""
    coords = Jet.coords(chart, order)
    y, z = coords[0], coords[1:]
    m = len(z)
    if inverse:
        Binv = B.inv()
        shifted = [z[i] - y.scale(dvec[i, 0]) for i in range(m)]
        comps = [sum((shifted[j].scale(Binv[i, j]) for j in range(m) if Binv[i, j] != 0),
                     Jet.zero(chart, order)) for i in range(m)]
    else:
        comps = [sum((z[j].scale(B[i, j]) for j in range(m) if B[i, j] != 0), Jet.zero(chart, order))
                 + y.scale(dvec[i, 0]) for i in range(m)]
    return [y] + comps


def _homogeneous_part(form, m):
    return FormJet(form.chart, form.degree,
                   {k: v.homogeneous(m) for k, v in form.components.items()}, form.order)


def _moser_field(rho_m, big):
    """Vector field ``X`` (no ``y`` component) with ``L_X dp^dq = -rho_m``."""
    ch = rho_m.chart
    alpha = homotopy_primitive(rho_m, check=False)
    alpha = FormJet(ch, 1, {k: v.with_order(big) for k, v in alpha.components.items()}, big)
    ay = alpha[(0,)]
    F = ay.integrate("y").truncate(big)
    comp = {}
    for name in ch.names[1:]:
        i = ch.index[name]
        comp[name] = (alpha[(i,)] - F.partial(i)).with_order(big)
    X = [Jet.zero(ch, big)]
    for name in ch.names[1:]:
        if name.startswith("p"):
            X.append(-comp["q" + name[1:]])
        else:
            X.append(comp["p" + name[1:]])
    return tuple(X)


def _moser_steps(omega_hat):
    ch = omega_hat.chart
    K = omega_hat.order
    B, dvec = _linear_prenormalization(omega_hat)
    lin = DiffeoJet(_linear_map(ch, K + 1, B, dvec))
    J = standard_symplectic(ch, K)
    cur = pullback(lin, omega_hat).truncate(K)
    fields = []
    for m in range(1, K + 1):
        rho = cur - J
        if rho.is_zero():
            break
        vals = [c.valuation() for c in rho.components.values()]
        if min(vals) < m:
            raise ConsistencyError(f"Moser step left a degree-{min(vals)} residual at step {m}")
        if min(vals) > m:
            continue
        X = _moser_field(_homogeneous_part(rho, m), K + 2)
        fields.append(X)
        cur = lie_series_form(X, cur, closed=True)
    if not (cur - J).is_zero():
        raise ConsistencyError("Moser iteration did not reach dp^dq")
    return B, dvec, fields


class _OrbitTransport:
    """``Psi = L o exp(X_1) o ... o exp(X_K)`` kept in factored form.

    Pulling a function back through ``Psi`` goes through the linear part
    (a degree-preserving substitution) and then one Lie series per step,
    which is much cheaper than substituting the composed components.
    """

    def __init__(self, chart, order, B, dvec, fields):
        self.chart = chart
        self.order = order
        self.B, self.dvec, self.fields = B, dvec, fields
        self._lin = _linear_map(chart, order, B, dvec)
        self._full = None

    def pull(self, g):
        """``g o Psi`` for ``g`` on the orbit chart."""
        g = compose(g, self._lin)
        for X in self.fields:
            g = lie_series(X, g)
        return g.truncate(self.order)

    def components(self):
        return [self.pull(Jet.var(self.chart, v, self.order)) for v in self.chart.names]

    def inverse_components(self):
        M = self.order
        comps = Jet.coords(self.chart, M)
        for X in reversed(self.fields):
            comps = [lie_series(X, c, t=-1) for c in comps]
        lin_inv = _linear_map(self.chart, M, self.B, self.dvec, inverse=True)
        return [compose(c, lin_inv).truncate(M) for c in comps]

    def _lifted(self):
        if self._full is None:
            full = Chart.full(self.chart.n)
            M = self.order
            lin = [Jet.var(full, "x", M)] + [c.to_chart(full, M) for c in self._lin]
            fields = [tuple([Jet.zero(full, X[0].order)] + [v.to_chart(full, v.order) for v in X])
                      for X in self.fields]
            self._full = (full, lin, fields)
        return self._full

    def pull_full(self, g, c=None, order=None):
        """``g o T`` with ``T = (x - c o Psi, y, Psi)`` on the full chart.

        ``T`` factors as the shift ``x -> x - c`` followed by the lift of
        ``Psi``; the shift is a finite Taylor sum because ``c(0) = 0``.
        """
        full, lin, fields = self._lifted()
        M = self.order if order is None else order
        g = g.truncate(M)
        if c is not None:
            cf = c.to_chart(full, c.order)
            acc = g
            term = g
            negc = -cf
            powc = None
            for j in range(1, M + 1):
                term = term.partial("x").scale(flint.fmpq(1, j))
                if term.is_zero():
                    break
                powc = negc if powc is None else powc * negc
                acc = acc + term * powc
            g = acc.truncate(M)
        g = compose(g, lin)
        for X in fields:
            g = lie_series(X, g)
        return g.truncate(M)


def _transport(omega_hat):
    K = omega_hat.order
    B, dvec, fields = _moser_steps(omega_hat)
    return _OrbitTransport(omega_hat.chart, K + 1, B, dvec, fields)


def moser_darboux_orbit(omega_hat, order=None, with_inverse=False):
    """Find ``Phi = (y, Phi~(y, p, q))`` with ``Phi^* dp^dq = omega_hat``.

    Parameters
    ----------
    omega_hat : FormJet
        Closed 2-form on the orbit chart, coefficient order ``K``.
    order : int, optional
        Truncate the input to this coefficient order first.
    with_inverse : bool
        Also return ``Psi = Phi^{-1}`` (computed exactly, not by inversion).

    Returns
    -------
    DiffeoJet or (DiffeoJet, DiffeoJet)
        Map(s) of order ``K + 1``.

    Raises
    ------
    FormError
        Input not closed.
    GenericityError
        Rank deficiency or kernel tangent to the fibres of ``y``.
    """
    ch = omega_hat.chart
    if ch.kind != "orbit" or not ch.standard:
        raise FormError("moser_darboux_orbit works on the standard orbit chart")
    if order is not None:
        omega_hat = omega_hat.truncate(order)
    if not is_closed(omega_hat):
        raise FormError("omega_hat is not closed")
    tr = _transport(omega_hat)
    phi = DiffeoJet(tr.inverse_components(), symplectic=None, preserves_f=True)
    if not with_inverse:
        return phi
    return phi, DiffeoJet(tr.components(), preserves_f=True)


# -- full pipeline --------------------------------------------------------------------

def _lift_orbit(jet, full, order):
    return jet.to_chart(full, order)


def verify_preliminary(h, nf, order=None):
    """Exact residual checks of a preliminary normal form; returns a dict of booleans."""
    N = nf.order if order is None else order
    T = nf.transform
    full = T.source
    hT = nf.pull(h, N)
    residual = (nf.unit * hT).truncate(N) - nf.section(N)
    omega = standard_symplectic(full, N + 1)
    sympl = pullback(T, omega).truncate(N) == omega.truncate(N)
    y = Jet.var(full, "y", N)
    return {
        "reconstruction": residual.is_zero(),
        "symplectic": sympl,
        "preserves_f": T["y"].truncate(N) == y,
        "unit": nf.unit.eval0() != 0,
        "R(0) = 0": all(r.eval0() == 0 for r in nf.R),
    }


def reduce_to_preliminary(h, N=None, k=None, verify=True):
    """Bring ``h`` to ``x^(k+1) + sum_{i<k} R_i(y, p, q) x^i``.

    Parameters
    ----------
    h : Jet
        Section on the standard full chart (read as an exact polynomial).
    N : int, optional
        Target order; defaults to ``h.order``.  Terms of ``h`` above ``N``
        are not discarded.  A term such as ``x^(N+1)`` reaches ``R_0``
        near degree ``N/(k+1)`` (the preparation is homogeneous for
        ``wt x = 1``, ``wt y, p, q = k + 1``), so the reading is exact
        only when ``h`` is the whole polynomial.
    k : int, optional
        Skip classification and use this ``k``.
    verify : bool
        Run the reconstruction and symplecticity checks and raise
        ``ConsistencyError`` on failure.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> from hamsec.jets import Chart
    >>> nf = reduce_to_preliminary(parse_polynomial("x^2+y+p1", Chart.full(1), 5))
    >>> str(nf.R[0])
    'y + p1'
    """
    N = _target_order(h, N)
    if k is None:
        cls = classify_section(h.truncate(N))
        if cls.tag not in ("S", "A1") and not (cls.tag == "Undetermined" and cls.k):
            raise ClassMismatch(f"section is {cls.name}; preliminary reduction needs S(k) or A1")
        k = cls.k
    full = h.chart
    orbit = Chart.orbit(full.n)
    unit_std, R = _prepare_exact(h, k, N)
    R_shift, c, omega_hat = kill_top_coefficient(R, k, check=verify)
    if not is_closed(omega_hat):
        raise FormError("omega_hat is not closed")
    tr = _transport(omega_hat)
    M = tr.order
    R_new = [tr.pull(r) for r in R_shift]
    psi = DiffeoJet(tr.components(), preserves_f=True)
    c_psi = tr.pull(c)
    x = Jet.var(full, "x", M)
    comps = [x - _lift_orbit(c_psi, full, M), Jet.var(full, "y", M)]
    comps += [_lift_orbit(psi[v], full, M) for v in orbit.names[1:]]
    T = DiffeoJet(comps, symplectic=True, preserves_f=True)
    unit = tr.pull_full(unit_std, c, N)
    nf = PreliminaryNormalForm(k=k, R=R_new, transform=T, unit=unit.truncate(N), order=N,
                               omega_hat=omega_hat, orbit_map=psi, shift=c, transport=tr)
    if verify:
        checks = verify_preliminary(h.truncate(N), nf)
        bad = [name for name, ok in checks.items() if not ok]
        if bad:
            raise ConsistencyError(f"preliminary normal form failed self-checks: {bad}")
    return nf


def _charpoly_JH(H, n):
    J = standard_J(n)
    Hm = flint.fmpq_mat([[as_fmpq(v) for v in row] for row in H])
    cp = (J * Hm).charpoly()
    return [cp[i] for i in range(cp.degree() + 1)]


def reduce_A1(h, N=None, verify=True):
    """Preliminary reduction of an ``A1`` section and the split ``R = psi + phi y``.

    Returns
    -------
    A1NormalForm
        ``psi`` on the reduced chart (raw, with its Hessian, inertia and
        the characteristic polynomial of ``J Hess``, all invariant under
        linear symplectic changes), ``phi`` on the orbit chart.

    Raises
    ------
    ClassMismatch
        If ``h`` is not ``A1``.
    GenericityError
        If ``phi(0) = 0`` or ``psi`` is not Morse.
    """
    N = _target_order(h, N)
    cls = classify_section(h.truncate(N))
    if cls.tag != "A1":
        raise ClassMismatch(f"section is {cls.name}, not A1")
    nf = reduce_to_preliminary(h, N=N, k=1, verify=verify)
    R = nf.R[0]
    psi_o, phi = divide_by_ideal_y(R)
    reduced = Chart.reduced(h.chart.n)
    psi = psi_o.to_chart(reduced, psi_o.order)
    if phi.eval0() == 0:
        raise GenericityError("phi(0) = 0", "phi(0)")
    names = reduced.names
    if any(psi.partial(v).eval0() != 0 for v in names):
        raise GenericityError("psi has a nonzero differential at 0", "dpsi(0)")
    H = [[psi.partial(a).partial(b).eval0() for b in names] for a in names]
    if not is_morse(H):
        raise GenericityError("psi is not Morse", "det Hess psi")
    return A1NormalForm(psi=psi, phi=phi, transform=nf.transform, unit=nf.unit, order=nf.order,
                        hessian=H, signature=signature(H), charpoly=_charpoly_JH(H, reduced.n))
