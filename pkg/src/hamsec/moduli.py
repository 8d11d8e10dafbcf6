"""Functional moduli of a section from its preliminary normal form.

After the preliminary reduction ``H = {x^(k+1) + sum_{i<k} R_i(y,p,q) x^i}``
the remaining freedom is a symplectomorphism ``Phi(p, q)`` of the reduced
chart acting on every ``R_i``.  Expanding the ``R_i`` in ``y`` gives the
associated map ``r = (r_0, ..., r_{2n-1})``; its symplectic normal form
fixes ``Phi`` and the transformed coefficients are the moduli.

Templates by class::

    S(k,1), k <= 2n   r of type S_0        g'(0) != 0
    S(2n+1,1)         r of type S_0        all R_i divided by y, R_2n extra
    S(1,l), l >= 2    r of type S_(l-2)    g'(0) = 0, g''(0) != 0
    S(k,l), k,l >= 2  r of type S_(l-1)    g'(0) != 0
    A1                Morse psi plus phi(0) != 0

Convention for ``g``: ``g(y) = R_0(y, 0, 0)``, so every ``phi_i`` vanishes
identically on the ``y``-axis for the first route and pure powers of ``y``
never enter the associated map.
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .classify import SingularityClass, assemble_prepared, classify_section
from .errors import ClassMismatch, ConsistencyError, GenericityError
from .jets import Chart, DiffeoJet, Jet, compose, invert, to_fraction
from .linalg import determinant
from .normalize import reduce_A1, reduce_to_preliminary
from .whitney import (MapJet, WhitneyModuli, ideal_membership, is_whitney_normal_form,
                      r1j_independent, reduce_R_omega, whitney_classify)

__all__ = ["SectionModuli", "split_taylor_in_y", "assemble_moduli", "validate_template",
           "required_s", "theorem_for", "normalizing_transform", "equivalence_between"]


@dataclass
class SectionModuli:
    """Moduli of a section, read off its exact normal form.

    Attributes
    ----------
    cls : SingularityClass
    theorem : int
        Template used: 3, 4, 5, 6 (the ``S`` routes) or 7 (``A1``).
    g : Jet or None
        Orbit-chart jet in ``y`` only; None for the ``S(2n+1,1)`` and
        ``A1`` templates.
    phi : list of Jet
        Orbit-chart tails ``phi_0 .. phi_{k-1}`` (``phi_0 .. phi_{2n-1}``
        for ``S(2n+1,1)``; the single ``phi`` for ``A1``).
    whitney : WhitneyModuli or None
    extra : Jet or None
        ``R_2n`` for ``S(2n+1,1)``.
    R : list of Jet
        Coefficients of the exact normal form.
    valid_order : int
    witnesses : tuple
        Genericity determinants and values, as ``(name, Fraction)``.
    """

    cls: SingularityClass
    theorem: int
    n: int
    k: int
    l: int
    g: Jet = None
    phi: list = field(default_factory=list)
    whitney: WhitneyModuli = None
    extra: Jet = None
    R: list = field(default_factory=list)
    valid_order: int = 0
    witnesses: tuple = ()
    a1: object = field(default=None, repr=False)
    prelim: object = field(default=None, repr=False, compare=False)
    phi_map: object = field(default=None, repr=False, compare=False)

    @property
    def s(self):
        return self.whitney.s if self.whitney is not None else None

    def jets(self):
        """Every functional modulus in a fixed order."""
        out = [] if self.g is None else [self.g]
        out += list(self.phi)
        if self.extra is not None:
            out.append(self.extra)
        if self.whitney is not None:
            out += self.whitney.jets()
        if self.a1 is not None:
            out.append(self.a1.psi)
        return out

    def equal_to_order(self, other, order):
        """Equality of the two moduli sets through ``order``.

        For ``A1`` the raw ``psi`` is only defined up to a symplectic
        change of variables, so the comparison uses ``phi(0)``, the
        Hessian inertia and the characteristic polynomial of ``J Hess``.
        """
        if (self.theorem, self.k, self.l, self.n) != (other.theorem, other.k, other.l, other.n):
            return False
        if self.theorem == 7:
            a, b = self.a1, other.a1
            return (a.phi.eval0() == b.phi.eval0() and a.signature == b.signature
                    and list(a.charpoly) == list(b.charpoly))
        mine, theirs = self.jets(), other.jets()
        return len(mine) == len(theirs) and all(
            x.equal_to_order(y, order) for x, y in zip(mine, theirs))

    def section(self, order=None):
        """The normal-form section on the full chart."""
        N = self.valid_order if order is None else order
        if self.theorem == 7:
            orbit = Chart.orbit(self.n)
            y = Jet.var(orbit, "y", N)
            R0 = self.a1.psi.to_chart(orbit, N) + self.a1.phi * y
            return assemble_prepared([R0.truncate(N)], 1, N)
        return assemble_prepared([r.truncate(N) for r in self.R], self.k, N)

    def to_json(self):
        from .report import jet_json
        out = {
            "class": self.cls.name,
            "theorem": self.theorem,
            "n": self.n,
            "k": self.k,
            "l": self.l,
            "valid_order": self.valid_order,
            "g": None if self.g is None else jet_json(self.g),
            "phi": [jet_json(p) for p in self.phi],
            "genericity": [{"condition": c, "value": str(v)} for c, v in self.witnesses],
        }
        if self.extra is not None:
            out["R_extra"] = jet_json(self.extra)
        if self.whitney is not None:
            w = self.whitney.to_json()
            for key in ("s", "psi", "r1j", "odd", "even_tilde", "certificates", "r1j_independent"):
                out[key] = w[key]
        if self.a1 is not None:
            out["A1"] = self.a1.to_json()
        return out


# -- dispatch helpers ------------------------------------------------------------

def theorem_for(k, l, n, tag="S"):
    """Template number for a class, or None outside the typical ranges."""
    if tag == "A1":
        return 7
    if l == 1:
        if 1 <= k <= 2 * n:
            return 3
        if k == 2 * n + 1:
            return 4
        return None
    if k == 1:
        return 5 if 2 <= l <= 2 * n + 1 else None
    if 2 <= k <= 2 * n and 2 <= l <= 2 * n and k + l - 1 <= 2 * n + 1:
        return 6
    return None


def required_s(k, l):
    """Tangency index of the associated map for ``S(k,l)``."""
    if l == 1:
        return 0
    return l - 2 if k == 1 else l - 1


def _reduced_part(jet, reduced):
    return jet.to_chart(reduced, jet.order)


def split_taylor_in_y(R, k, n):
    """Expand the coefficients in ``y`` and collect the associated map.

    Parameters
    ----------
    R : list of Jet
        ``R_0 .. R_{k-1}`` on the orbit chart.
    k, n : int
        ``1 <= k <= 2n + 1``.

    Returns
    -------
    g : Jet or None
        ``R_0(y, 0, 0)``; None when ``k = 2n + 1``.
    r : MapJet
    phi : list of Jet
        ``phi_i`` with ``R_i = r_i + phi_i y`` (``i >= 1``) and
        ``R_0 = g + r_0 + sum_j r_{k-1+j} y^j + phi_0 y^(2n-k+1)``.
    extra : Jet or None
        ``R_2n`` when ``k = 2n + 1``.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> R0 = parse_polynomial("y + p1 + y*q1", Chart.orbit(1), 5)
    >>> g, r, phi, extra = split_taylor_in_y([R0], 1, 1)
    >>> str(g), [str(c) for c in r], str(phi[0])
    ('y', ['p1', 'q1'], '0')
    """
    if len(R) != k:
        raise ValueError(f"expected {k} coefficients, got {len(R)}")
    if not 1 <= k <= 2 * n + 1:
        raise ClassMismatch(f"k = {k} outside 1..{2 * n + 1}")
    orbit = R[0].chart
    reduced = Chart.reduced(n)
    pq = list(reduced.names)
    yv = Jet.var(orbit, "y", R[0].order)
    if k == 2 * n + 1:
        r, phi = [], []
        for Ri in R[: 2 * n]:
            ri = Ri.subs_zero("y")
            r.append(_reduced_part(ri, reduced))
            phi.append((Ri - ri).divide_by("y"))
        return None, MapJet(r), phi, R[2 * n]
    R0 = R[0]
    g = R0.subs_zero(pq)
    rest = R0 - g
    top = 2 * n - k
    coeffs = [rest.coefficient_in("y", j) for j in range(top + 1)]
    r = [None] * (2 * n)
    r[0] = _reduced_part(coeffs[0], reduced)
    for j in range(1, top + 1):
        r[k - 1 + j] = _reduced_part(coeffs[j], reduced)
    tail = rest
    for j, c in enumerate(coeffs):
        tail = tail - (c * yv ** j if j else c)
    phi0 = tail
    for _ in range(top + 1):
        phi0 = phi0.divide_by("y")
    phi = [phi0]
    for i in range(1, k):
        ri = R[i].subs_zero("y")
        r[i] = _reduced_part(ri, reduced)
        phi.append((R[i] - ri).divide_by("y"))
    return g, MapJet(r), phi, None


def _lift_to_orbit(phi_map, orbit, order):
    """``(y, p, q) -> (y, Phi(p, q))`` as an orbit-chart substitution."""
    comps = {v: c.to_chart(orbit, order) for v, c in zip(phi_map.target.names, phi_map)}
    return [Jet.var(orbit, "y", order) if v == "y" else comps[v] for v in orbit.names]


def _g_derivatives(g):
    """``g'(0), g''(0)``."""
    d1 = g.partial("y").eval0() if g.order >= 1 else None
    d2 = g.partial("y").partial("y").eval0() if g.order >= 2 else None
    return d1, d2


# -- main entry ----------------------------------------------------------------------

def assemble_moduli(h, N=None, verify=True):
    """Classify, reduce and read off the functional moduli of a section.

    Parameters
    ----------
    h : Jet
        Section on the standard full chart, read as an exact polynomial.
        Terms above ``N`` are used, see :func:`reduce_to_preliminary`.
    N : int, optional
        Working order; defaults to ``h.order``.

    Returns
    -------
    SectionModuli

    Raises
    ------
    GenericityError
        The section lies outside the open set where the template applies;
        ``witness`` names the failing determinant.
    ClassMismatch
        Class outside the typical ranges, or not ``S``/``A1``.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> m = assemble_moduli(parse_polynomial("x^2 + y + p1 + y*q1", Chart.full(1), 6))
    >>> m.theorem, str(m.g), [str(c) for c in m.whitney.normal_form]
    (3, 'y', ['p1', 'q1'])
    """
    N = h.order if N is None else min(N, h.order)
    n = h.chart.n
    cls = classify_section(h.truncate(N))
    if cls.tag == "A1":
        a1 = reduce_A1(h, N=N, verify=verify)
        wit = (("phi(0)", a1.phi.eval0()), ("det Hess psi", determinant(a1.hessian)))
        return SectionModuli(cls, 7, n, 1, None, phi=[a1.phi], valid_order=a1.order,
                             witnesses=wit, a1=a1, R=[], prelim=None)
    if cls.tag != "S":
        raise ClassMismatch(f"section is {cls.name}; moduli need S(k,l) or A1")
    k, l = cls.k, cls.l
    thm = theorem_for(k, l, n)
    if thm is None:
        raise ClassMismatch(f"{cls.name} lies outside the typical range for n = {n}")
    nf = reduce_to_preliminary(h, N=N, k=k, verify=verify)
    R = nf.R
    g, r, phi, extra = split_taylor_in_y(R, k, n)
    wit = []
    if thm == 4:
        orbit = R[0].chart
        rows = [[to_fraction(v) for v in Ri.gradient0()] for Ri in R]
        det = determinant(rows)
        wit.append(("det[dR_0..dR_2n](0)", to_fraction(det)))
        if det == 0:
            raise GenericityError("coefficient map is not a local diffeomorphism", "det[dR](0)")
    s_req = required_s(k, l)
    wc = whitney_classify(r)
    wit += list(wc.witnesses)
    if not wc.determined:
        raise GenericityError(f"associated map: tangency index undetermined at order {r.order}", "s")
    if wc.s != s_req:
        raise ConsistencyError(f"associated map has s = {wc.s}, class {cls.name} needs {s_req}")
    for flag in "abc":
        if not getattr(wc, flag):
            raise GenericityError(f"associated map fails condition ({flag})", f"flag {flag}")
    wm, Phi = reduce_R_omega(r)
    orbit = R[0].chart
    M = Phi.order
    sub = _lift_to_orbit(Phi, orbit, M)
    Rn = [compose(Ri, sub) for Ri in R]
    g2, r2, phi2, extra2 = split_taylor_in_y(Rn, k, n)
    vo = min(wm.valid_order, min(p.order for p in phi2), min(x.order for x in Rn))
    if not r2.equal_to_order(wm.normal_form, min(r2.order, wm.normal_form.order)):
        raise ConsistencyError("transformed coefficients disagree with the map normal form")
    if g is not None:
        d1, d2 = _g_derivatives(g)
        wit.append(("g'(0)", d1))
        if thm == 5:
            wit.append(("g''(0)", d2))
            if d1 != 0 or d2 == 0:
                raise GenericityError("g is not Morse at 0", "g''(0)")
        elif d1 == 0:
            raise GenericityError("g'(0) = 0", "g'(0)")
    else:
        dy = extra2.partial("y").eval0()
        wit.append(("dR_2n/dy(0)", dy))
        wit.append(("phi_0(0)", phi2[0].eval0()))
        if dy == 0:
            raise GenericityError("dR_2n/dy(0) = 0", "dR_2n/dy(0)")
    return SectionModuli(cls, thm, n, k, l, g=g2, phi=phi2, whitney=wm, extra=extra2, R=Rn,
                         valid_order=vo, witnesses=tuple(wit), prelim=nf, phi_map=Phi)


# -- sufficiency: the map between two sections with equal moduli -------------------

def normalizing_transform(m):
    """``(A, U)`` with ``U * (h o A) = m.section()`` on the full chart.

    ``A`` is the preliminary transform followed by the lift
    ``(x, y, p, q) -> (x, y, Phi(p, q))`` of the map-reducing
    symplectomorphism; ``U`` is the preliminary unit pulled back by that
    lift.  Not available for ``A1``, whose ``psi`` is left raw.
    """
    if m.theorem == 7 or m.prelim is None:
        raise ClassMismatch("no normalizing transform for the A1 template")
    nf = m.prelim
    full = nf.transform.source
    M = min(nf.order, m.phi_map.order)
    lift = [Jet.var(full, "x", M), Jet.var(full, "y", M)]
    comps = {v: c.to_chart(full, M) for v, c in zip(m.phi_map.target.names, m.phi_map)}
    lift += [comps[v] for v in full.names[2:]]
    lift = DiffeoJet(lift, symplectic=True, preserves_f=True)
    A = DiffeoJet([c.truncate(M) for c in nf.transform], symplectic=True, preserves_f=True)
    A = DiffeoJet(A.compose(lift).components, symplectic=True, preserves_f=True)
    U = compose(nf.unit.truncate(M), lift)
    return A, U


def equivalence_between(m1, m2, order=None):
    """Isotropy map and unit carrying the section of ``m1`` to that of ``m2``.

    With ``U_i (h_i o A_i) = F_i`` and ``F_1 = F_2`` to ``order``, the map
    ``C = A_1 o A_2^(-1)`` and the unit ``w = (U_1 / U_2) o A_2^(-1)``
    satisfy ``h_2 = w (h_1 o C)`` to ``order``.

    Raises
    ------
    ConsistencyError
        If the moduli differ through ``order``.
    """
    N = min(m1.valid_order, m2.valid_order) if order is None else order
    if not m1.equal_to_order(m2, N):
        raise ConsistencyError(f"moduli differ at order <= {N}")
    A1, U1 = normalizing_transform(m1)
    A2, U2 = normalizing_transform(m2)
    A2inv = invert(A2.truncate(N))
    C = DiffeoJet([compose(c.truncate(N), A2inv) for c in A1], symplectic=True, preserves_f=True)
    w = compose((U1.truncate(N) * U2.truncate(N).inverse()).truncate(N), A2inv)
    return C, w


# -- validation -------------------------------------------------------------------

def validate_template(m):
    """Re-check every shape condition of ``m`` with exact arithmetic.

    Returns a dict ``{"checks": {name: bool}, "failures": [...],
    "witnesses": {...}, "ok": bool}``.  Never raises on a failed check.
    """
    checks = {}
    wits = {}
    n = m.n
    if m.theorem == 7:
        a1 = m.a1
        checks["phi(0) != 0"] = a1.phi.eval0() != 0
        checks["psi Morse"] = determinant(a1.hessian) != 0
        return _report(checks, wits)
    if m.g is not None:
        d1, d2 = _g_derivatives(m.g)
        pq = list(Chart.reduced(n).names)
        checks["g depends on y only"] = m.g.subs_zero(pq) == m.g
        if m.theorem == 5:
            checks["g'(0) = 0"] = d1 == 0
            checks["g''(0) != 0"] = d2 not in (0, None)
        else:
            checks["g'(0) != 0"] = d1 not in (0, None)
    if m.theorem == 4:
        checks["dR_2n/dy(0) != 0"] = m.extra is not None and m.extra.partial("y").eval0() != 0
    w = m.whitney
    if w is None:
        checks["whitney moduli present"] = False
        return _report(checks, wits)
    r = w.normal_form
    fails = is_whitney_normal_form(r, w.s)
    checks["map normal form shape"] = not fails
    if fails:
        wits["map normal form shape"] = fails
    checks["s matches class"] = w.s == required_s(m.k, m.l)
    checks["psi(0) != 0"] = w.psi.eval0() != 0
    checks["r_1j(0) = 0"] = all(j.eval0() == 0 for j in w.r1j)
    checks["r_1j free of q1"] = all(j.degree_in("q1") <= 0 for j in w.r1j)
    if w.s:
        checks["r_1j independent"] = r1j_independent(w.r1j)
    for idx, jet, label in _ideal_items(w):
        cert = ideal_membership(jet, idx)
        checks[f"{label} in m{idx}"] = cert.member
        if not cert.member:
            wits[f"{label} in m{idx}"] = [list(e) for e in cert.offending]
        else:
            back = cert.recombine(jet.chart, jet.order)
            checks[f"{label} certificate recombines"] = back.equal_to_order(jet, jet.order)
    for m_ in range(1, n):
        checks[f"dr{2 * m_ + 1}/dq{m_ + 1}(0) != 0"] = \
            w.odd[m_ - 1].gradient0()[r.chart.index[f"q{m_ + 1}"]] != 0
    # the coefficients reassemble from the moduli
    if m.R:
        try:
            g, r2, phi, extra = split_taylor_in_y(m.R, m.k, n)
            N = min(r2.order, r.order)
            checks["coefficients match moduli"] = r2.equal_to_order(r, N) and all(
                a.equal_to_order(b, min(a.order, b.order)) for a, b in zip(phi, m.phi))
        except (ValueError, ClassMismatch) as exc:
            checks["coefficients match moduli"] = False
            wits["coefficients match moduli"] = str(exc)
        sec = m.section(min([m.cls.order] + [x.order for x in m.R]))
        again = classify_section(sec)
        checks["round trip (k,l)"] = (again.tag, again.k, again.l) == ("S", m.k, m.l)
        if not checks["round trip (k,l)"]:
            wits["round trip (k,l)"] = again.name
    return _report(checks, wits)


def _ideal_items(w):
    for m_, jet in enumerate(w.odd, 1):
        yield 2 * m_ + 1, jet, f"r{2 * m_ + 1}"
    for m_, jet in enumerate(w.even_tilde, 1):
        yield 2 * m_, jet, f"r{2 * m_}~"


def _report(checks, wits):
    failures = [k for k, ok in checks.items() if not ok]
    return {"checks": checks, "failures": failures, "witnesses": wits, "ok": not failures}
