"""Whitney-type maps of ``(R^2n, dp^dq)`` and their symplectic moduli.

A map ``r = (r_0, ..., r_{2n-1})`` of the reduced chart is of type
``S_s`` when the brackets ``{r_0, r_1}_i = Z_{r_0}^{i+1} r_1`` vanish at 0
for ``i < s`` and not for ``i = s``, plus the independence conditions
(a)-(c) checked by :func:`whitney_classify`.

Under source symplectomorphisms every such map has the unique normal form
computed by :func:`reduce_R_omega`::

    r_0      = p_1
    r_1      = psi * q_1^(s+1) + sum_{j<s} r_{1,j}(qhat_1) q_1^j
    r_{2m}   = p_{m+1} + (element of m_{2m})
    r_{2m+1} = element of m_{2m+1} with d r_{2m+1}/d q_{m+1} (0) != 0

where ``m_i`` is generated by the first ``i`` of ``q1, p1, q2, p2, ...``.
The reduction is a chain of linear symplectic maps and time-one flows of
polynomial Hamiltonians, so the returned diffeomorphism is symplectic
exactly (to its order).
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

import flint

from .errors import (ChartMismatch, ConsistencyError, GenericityError, PrecisionError,
                     Undetermined)
from .jets import Chart, DiffeoJet, Jet, as_fmpq, compose, invert, to_fraction
from .linalg import rank, standard_J, symplectic_basis
from .poisson import apply_field, hamiltonian_field, lie_series

__all__ = [
    "MapJet", "WhitneyClass", "WhitneyModuli", "IdealCertificate",
    "whitney_classify", "reduce_R", "reduce_R_omega", "ideal_membership",
    "ideal_generators", "jacobian_determinant", "is_whitney_normal_form", "r1j_independent",
]


# -- data types --------------------------------------------------------------------

class MapJet:
    """A map germ ``(R^2n, 0) -> (R^2n, 0)`` given by 2n reduced-chart jets."""

    __slots__ = ("components", "n")

    def __init__(self, components):
        comps = tuple(components)
        if not comps:
            raise ValueError("empty map")
        ch = comps[0].chart
        if ch.kind != "reduced" or not ch.standard:
            raise ChartMismatch("Whitney maps live on the standard reduced chart")
        if any(c.chart is not ch for c in comps):
            raise ChartMismatch("map components on different charts")
        if len(comps) != ch.dim:
            raise ValueError(f"expected {ch.dim} components, got {len(comps)}")
        for i, c in enumerate(comps):
            if c.eval0() != 0:
                raise ValueError(f"component r_{i} does not vanish at 0")
        self.components = comps
        self.n = ch.n

    @classmethod
    def identity(cls, n, order):
        """``(p1, q1, ..., pn, qn)``."""
        ch = Chart.reduced(n)
        return cls([Jet.var(ch, f"{v}{i}", order) for i in range(1, n + 1) for v in "pq"])

    @property
    def chart(self):
        return self.components[0].chart

    @property
    def order(self):
        return min(c.order for c in self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def truncate(self, order):
        return MapJet([c.truncate(order) for c in self.components])

    def compose(self, phi):
        """``r o phi`` for a source diffeomorphism ``phi``."""
        return MapJet([compose(c, phi) for c in self.components])

    def equal_to_order(self, other, order):
        return all(a.equal_to_order(b, order) for a, b in zip(self, other))

    def __eq__(self, other):
        return isinstance(other, MapJet) and self.components == other.components

    def __repr__(self):
        body = ", ".join(c.to_str() for c in self.components)
        return f"MapJet({body}; order={self.order})"


@dataclass(frozen=True)
class WhitneyClass:
    """Result of :func:`whitney_classify`.

    ``s`` is an int or :class:`Undetermined`; ``d`` is informational
    only (the ordinary-Whitney singular-locus condition).
    """

    s: object
    a: bool
    b: bool
    c: bool
    d: bool
    witnesses: tuple = field(default=(), compare=False)
    order: int = 0
    n: int = 1

    @property
    def determined(self):
        return not isinstance(self.s, Undetermined)

    @property
    def whitney(self):
        """Membership in ``S_s``: conditions (a)-(c) together."""
        return self.determined and self.a and self.b and self.c

    @property
    def name(self):
        return f"S_{self.s}" if self.determined else str(self.s)

    def __str__(self):
        return self.name

    def to_json(self):
        from .report import rat
        return {
            "s": self.s if self.determined else None,
            "class": self.name,
            "flags": {"a": self.a, "b": self.b, "c": self.c, "d": self.d},
            "order": self.order,
            "witnesses": [{"condition": k, "value": rat(v)} for k, v in self.witnesses],
        }


@dataclass(frozen=True)
class IdealCertificate:
    """Outcome of :func:`ideal_membership`.

    Attributes
    ----------
    index : int
        ``i`` in ``m_i``.
    generators : tuple of str
    cofactors : dict
        Generator name to cofactor jet; ``a = sum g * cofactors[g]``.
    offending : tuple
        Exponent vectors of monomials containing no generator (empty on
        success).
    """

    index: int
    generators: tuple
    cofactors: dict
    offending: tuple = ()

    @property
    def member(self):
        return not self.offending

    def __bool__(self):
        return self.member

    def recombine(self, chart, order):
        """``sum g * c_g``; equals the tested jet when the membership holds."""
        out = Jet.zero(chart, order)
        for g, c in self.cofactors.items():
            out = out + Jet.var(chart, g, order) * c
        return out.truncate(order)

    def to_json(self):
        from .report import jet_json
        return {
            "ideal": f"m{self.index}",
            "generators": list(self.generators),
            "member": self.member,
            "cofactors": {g: jet_json(c) for g, c in self.cofactors.items()},
            "offending": [list(e) for e in self.offending],
        }


@dataclass
class WhitneyModuli:
    """The moduli set of a Whitney-type map under source symplectomorphisms.

    Attributes
    ----------
    s : int
    psi : Jet
        ``psi(0) != 0``; order ``N - s - 1``.
    r1j : list of Jet
        ``r_{1,0} .. r_{1,s-1}``, free of ``q1``.
    odd : list of Jet
        ``r_3, r_5, ..., r_{2n-1}`` (``r_{2m+1}`` for m = 1..n-1).
    even_tilde : list of Jet
        ``r_{2m} - p_{m+1}`` for m = 1..n-1.
    certificates : dict
        Label to :class:`IdealCertificate`.
    normal_form : MapJet
    valid_order : int
        Order up to which every listed jet is exact.
    independent : bool
        Whether ``d r_{1,0} ^ ... ^ d r_{1,s-1} (0) != 0``.
    """

    s: int
    n: int
    psi: Jet
    r1j: list
    odd: list
    even_tilde: list
    certificates: dict
    normal_form: MapJet
    valid_order: int
    independent: bool = True

    def jets(self):
        """All moduli in a fixed order, for comparisons."""
        return [self.psi] + list(self.r1j) + list(self.odd) + list(self.even_tilde)

    def equal_to_order(self, other, order):
        if self.s != other.s or self.n != other.n:
            return False
        return all(a.equal_to_order(b, order) for a, b in zip(self.jets(), other.jets()))

    def to_json(self):
        from .report import jet_json
        return {
            "s": self.s,
            "n": self.n,
            "valid_order": self.valid_order,
            "r1j_independent": self.independent,
            "psi": jet_json(self.psi),
            "r1j": [jet_json(j) for j in self.r1j],
            "odd": {f"r{2 * m + 1}": jet_json(j) for m, j in enumerate(self.odd, 1)},
            "even_tilde": {f"r{2 * m}~": jet_json(j) for m, j in enumerate(self.even_tilde, 1)},
            "certificates": {k: c.to_json() for k, c in self.certificates.items()},
            "normal_form": [jet_json(c) for c in self.normal_form],
        }


# -- ideals ------------------------------------------------------------------------

def ideal_generators(n, i):
    """Names generating ``m_i``: the first ``i`` of ``q1, p1, q2, p2, ...``."""
    if not 0 <= i <= 2 * n:
        raise ValueError(f"ideal index must lie in 0..{2 * n}")
    seq = []
    for j in range(1, n + 1):
        seq += [f"q{j}", f"p{j}"]
    return tuple(seq[:i])


def ideal_membership(a, i):
    """Decide ``a in m_i`` by greedy monomial division.

    Each monomial goes to the first generator (in the order ``q1, p1, q2,
    ...``) that divides it.  Monomials divisible by none are returned as
    the failure witness.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> ch = Chart.reduced(2)
    >>> cert = ideal_membership(parse_polynomial("q1*p1", ch, 4), 1)
    >>> cert.member, str(cert.cofactors["q1"])
    (True, 'p1')
    >>> ideal_membership(parse_polynomial("p2", ch, 4), 2).offending
    ((0, 1, 0, 0),)
    """
    ch = a.chart
    if ch.kind != "reduced":
        raise ChartMismatch("ideal membership is defined on the reduced chart")
    gens = ideal_generators(ch.n, i)
    gidx = [ch.index[g] for g in gens]
    buckets = {g: {} for g in gens}
    bad = []
    for exp, c in a.terms():
        for g, k in zip(gens, gidx):
            if exp[k]:
                e = list(exp)
                e[k] -= 1
                buckets[g][tuple(e)] = c
                break
        else:
            bad.append(tuple(exp))
    N = a.order - 1
    cof = {g: Jet.from_dict(ch, d, N) for g, d in buckets.items() if d}
    return IdealCertificate(i, gens, cof, tuple(sorted(bad)))


# -- helpers ---------------------------------------------------------------------

def _pair_names(n, m):
    """Variables of the symplectic slice ``W_m = {p1=q1=...=pm=qm=0}``, local order."""
    return [f"p{i}" for i in range(m + 1, n + 1)] + [f"q{i}" for i in range(m + 1, n + 1)]


def _frozen_names(n, m):
    return [f"p{i}" for i in range(1, m + 1)] + [f"q{i}" for i in range(1, m + 1)]


def _grad(jet, names):
    g = jet.gradient0()
    return [g[jet.chart.index[v]] for v in names]


def jacobian_determinant(comps):
    """``det[d r_i / d z_j]`` as a jet, by cofactor expansion with memoisation."""
    ch = comps[0].chart
    rows = [[c.partial(v) for v in ch.names] for c in comps]
    memo = {}

    def det(i, cols):
        if i == len(rows):
            return None
        key = (i, cols)
        if key in memo:
            return memo[key]
        out = None
        sign = 1
        for j in range(len(rows)):
            if not (cols >> j) & 1:
                continue
            e = rows[i][j]
            if not e.is_zero():
                rest = det(i + 1, cols & ~(1 << j))
                t = e if rest is None else e * rest
                t = t if sign > 0 else -t
                out = t if out is None else out + t
            sign = -sign
        if out is None:
            out = Jet.zero(ch, min(r.order for row in rows for r in row))
        memo[key] = out
        return out

    return det(0, (1 << len(rows)) - 1)


def _split_var(g, v, e):
    """``g = v^e A + B`` with ``deg_v B < e``."""
    ch = g.chart
    zero = ch.ctx.from_dict({})
    ve = ch.ctx.gens()[ch.index[v]] ** e
    N = g.order
    a_comps = [zero] * max(N - e + 1, 0)
    b_comps = [zero] * (N + 1)
    for deg, poly in enumerate(g.components):
        if poly.is_zero():
            continue
        quo, rem = divmod(poly, ve)
        b_comps[deg] = rem
        if not quo.is_zero():
            a_comps[deg - e] = quo
    return Jet(ch, N - e, a_comps), Jet(ch, N, b_comps)


def _regular_variable(g):
    """First variable (lowest regularity order, then canonical order) in which ``g`` is regular."""
    ch = g.chart
    best = None
    for v in ch.names:
        e = g.subs_zero([u for u in ch.names if u != v]).valuation()
        if e <= g.order and (best is None or e < best[1]):
            best = (v, e)
    return best


def _weierstrass_divide(F, g, v, e):
    """``F = Q g + rem`` with ``deg_v rem < e``, both read as exact polynomials.

    Runs on the chart with weight 1 for ``v`` and ``e`` for the others,
    which keeps the division graded.  Returns ``(Q(0), rem, valid)`` with
    ``rem`` on the standard chart; terms of ``rem`` up to degree
    ``valid`` depend only on the jets of ``F`` and ``g``.
    """
    ch = F.chart
    M = min(F.order, g.order)
    W = e * M
    wch = ch.with_weights([1 if u == v else e for u in ch.names]) if e > 1 else ch
    Fw = F.truncate(M).to_chart(wch, W, exact=True)
    gw = g.truncate(M).to_chart(wch, W, exact=True)
    others = [u for u in ch.names if u != v]
    g0 = gw.subs_zero(others)
    E = g0
    for _ in range(e):
        E = E.divide_by(v)
    einv = E.inverse()
    g1 = gw - g0
    cur = Fw
    Q = Jet.zero(wch, W - e)
    rem = Jet.zero(wch, W)
    for _ in range(W + 2):
        if cur.is_zero():
            break
        A, B = _split_var(cur, v, e)
        rem = rem + B
        q = A * einv
        Q = Q + q
        cur = -(q * g1)
    else:
        raise ConsistencyError("division did not terminate")
    valid = M // e
    rem_std = Jet.from_poly(ch, rem.poly().project_to_context(ch.ctx), valid)
    return Q.eval0(), rem_std, valid


# -- classification ---------------------------------------------------------------

def _as_map(r):
    return r if isinstance(r, MapJet) else MapJet(r)


def whitney_classify(r, maxorder=None):
    """Tangency index ``s`` and the conditions (a)-(d) of a Whitney-type map.

    Parameters
    ----------
    r : MapJet or sequence of Jet
    maxorder : int, optional
        Largest bracket index tried for ``s``.

    Returns
    -------
    WhitneyClass

    Examples
    --------
    >>> str(whitney_classify(MapJet.identity(2, 4)))
    'S_0'
    """
    r = _as_map(r)
    n = r.n
    ch = r.chart
    names = list(ch.names)
    N = r.order
    r0, r1 = r[0], r[1]
    wit = []
    Z = hamiltonian_field(r0)
    B = []
    cur = r1
    s = None
    i = -1
    while True:
        i += 1
        if maxorder is not None and i > maxorder:
            break
        cur = apply_field(Z, cur)
        if cur.order < 0:
            break
        B.append(cur)
        v = cur.eval0()
        if v != 0:
            s = i
            wit.append((f"{{r0,r1}}_{i}(0)", to_fraction(v)))
            break
    if s is None:
        wit.append(("{r0,r1}_i(0) = 0 for all available i", Fraction(0)))
        return WhitneyClass(Undetermined(N), False, False, False, False, tuple(wit), N, n)

    g0 = _grad(r0, names)
    a = any(x != 0 for x in g0)
    if s >= 1 and n >= 2:
        rk = rank([g0, _grad(r1, names)])
        wit.append(("rank[dr0, dr1](0)", Fraction(rk)))
        a = a and rk == 2
    wit.append(("flag a", Fraction(int(a))))

    rows_b = [g0] + [_grad(B[j], names) for j in range(s)]
    rk_b = rank(rows_b)
    wit.append((f"rank[dr0, d{{r0,r1}}_0..{s - 1}](0)" if s else "rank[dr0](0)", Fraction(rk_b)))
    b = rk_b == s + 1

    pivot = r1 if s == 0 else B[s - 1]
    rows_c = [g0, _grad(pivot, names)] + [_grad(r[i], names) for i in range(2, 2 * n)]
    rk_c = rank(rows_c)
    wit.append(("rank[dr0, d{r0,r1}_{s-1}, dr2..](0)", Fraction(rk_c)))
    c = rk_c == 2 * n

    d, dwit = _flag_d(r, s, B)
    wit.extend(dwit)
    return WhitneyClass(s, a, b, c, d, tuple(wit), N, n)


def _flag_d(r, s, B):
    """Singular locus ``{det dr = 0}`` against ``{{r0,r1} = 0}`` as ideals."""
    D = jacobian_determinant(list(r))
    if s == 0:
        v = D.eval0()
        return v != 0, [("det[dr](0)", to_fraction(v))]
    g = B[0]
    reg = _regular_variable(g)
    if reg is None or D.order < 1:
        return False, [("flag d undecided at this order", Fraction(0))]
    v, e = reg
    try:
        unit0, rem, valid = _weierstrass_divide(D, g, v, e)
    except PrecisionError:
        return False, [("flag d undecided at this order", Fraction(0))]
    wit = [(f"det[dr] mod {{r0,r1}} (terms up to order {valid})", Fraction(rem.nterms())),
           ("unit(0)", to_fraction(unit0))]
    return rem.is_zero() and unit0 != 0, wit


# -- symplectic reduction -----------------------------------------------------------

class _Reducer:
    """Carries ``r o Phi`` and the components of ``Phi`` through the steps."""

    def __init__(self, r, N):
        self.ch = r.chart
        self.n = r.n
        self.N = N
        self.r = [c.truncate(N) for c in r]
        self.phi = list(Jet.coords(self.ch, N + 1))

    def flow(self, G):
        G = G.with_order(self.N + 2)
        Z = hamiltonian_field(G)
        self.r = [lie_series(Z, c) for c in self.r]
        self.phi = [lie_series(Z, c) for c in self.phi]

    def linear(self, subst):
        self.r = [compose(c, subst) for c in self.r]
        self.phi = [compose(c, subst) for c in self.phi]

    # level m: normalise (a, c) on W_m to (p_{m+1}, <q_{m+1}>)
    def normalize_pair(self, m, a_of, c_of):
        n, ch = self.n, self.ch
        local = _pair_names(n, m)
        frozen = _frozen_names(n, m)
        pv, qv = f"p{m + 1}", f"q{m + 1}"

        def restrict(j):
            return j.subs_zero(frozen)

        # linear symplectic step on W_m
        d = n - m
        J = standard_J(d)
        alpha = flint.fmpq_mat(2 * d, 1, [as_fmpq(x) for x in _grad(a_of(), local)])
        gamma = flint.fmpq_mat(2 * d, 1, [as_fmpq(x) for x in _grad(c_of(), local)])
        mu = (alpha.transpose() * J * gamma)[0, 0]
        if mu == 0:
            raise GenericityError(f"pair {m}: linear parts are not in symplectic duality", f"pair{m}")
        B = symplectic_basis(J, first=[(alpha, gamma * (1 / mu))])
        Minv = B.transpose().inv()
        sub = list(Jet.coords(ch, self.N + 2))
        coords = {v: sub[ch.index[v]] for v in local}
        for i, v in enumerate(local):
            acc = Jet.zero(ch, self.N + 2)
            for j, u in enumerate(local):
                if Minv[i, j] != 0:
                    acc = acc + coords[u].scale(Minv[i, j])
            sub[ch.index[v]] = acc
        self.linear(sub)

        # a -> p_{m+1} on W_m, degree by degree
        for k in range(2, self.N + 1):
            ak = restrict(a_of()).homogeneous(k)
            if ak.is_zero():
                continue
            self.flow(-ak.integrate(qv))
        lam = c_of().gradient0()[ch.index[qv]]
        if lam == 0:
            raise ConsistencyError("lost the linear term of the flattened function")
        # flatten {c = 0} to {q_{m+1} = 0} keeping a = p_{m+1}
        c = c_of()
        for k in range(2, c.order + 1):
            ck = restrict(c).subs_zero(qv).homogeneous(k)
            if not ck.is_zero():
                self.flow(ck.integrate(pv).scale(1 / lam))
                c = c_of()


def _singular_function(r1, s):
    """``Z_{p1}^s r1 = (-d/dq1)^s r1`` once ``r0 = p1``."""
    out = r1
    for _ in range(s):
        out = -out.partial("q1")
    return out


def reduce_R_omega(r, s=None, N=None):
    """Normal form of a Whitney-type map under source symplectomorphisms.

    Parameters
    ----------
    r : MapJet or sequence of Jet
    s : int, optional
        Checked against :func:`whitney_classify` when given.
    N : int, optional
        Working order; defaults to the order of ``r``.

    Returns
    -------
    moduli : WhitneyModuli
    phi : DiffeoJet
        Symplectic, order ``N + 1``, with ``r o phi`` the normal form.

    Raises
    ------
    GenericityError
        Conditions (a)-(c) fail, or ``s`` is undetermined.

    Examples
    --------
    >>> from hamsec.parsing import parse_map
    >>> r = MapJet(parse_map("p1; q1^2 + p2; p2; q2", Chart.reduced(2), 6))
    >>> mod, phi = reduce_R_omega(r)
    >>> mod.s, str(mod.psi), [str(j) for j in mod.r1j]
    (1, '1', ['p2'])
    """
    r = _as_map(r)
    if N is not None:
        r = r.truncate(N)
    N = r.order
    cls = whitney_classify(r)
    if not cls.determined:
        raise GenericityError(f"tangency index undetermined at order {N}", "s")
    if s is not None and s != cls.s:
        raise GenericityError(f"map has s={cls.s}, expected {s}", "s")
    for flag in "abc":
        if not getattr(cls, flag):
            raise GenericityError(f"condition ({flag}) fails", flag)
    s = cls.s
    if N < s + 2:
        raise PrecisionError(f"order {N} too low for s={s}")
    n = r.n
    red = _Reducer(r, N)
    ch = red.ch

    def z_pow(j):
        Z = hamiltonian_field(red.r[0])
        out = red.r[1]
        for _ in range(j):
            out = apply_field(Z, out)
        return out

    # level 0: r0 -> p1 and the s-singular locus of r1 -> {q1 = 0}
    red.normalize_pair(0, lambda: red.r[0], lambda: z_pow(s) if s else red.r[1])
    red.r[0] = Jet.var(ch, "p1", N)
    for m in range(1, n):
        red.normalize_pair(m, lambda m=m: red.r[2 * m], lambda m=m: red.r[2 * m + 1])

    moduli = _read_moduli(red.r, s, n, N)
    phi = DiffeoJet(red.phi, symplectic=True)
    return moduli, phi


def _read_moduli(comps, s, n, N):
    ch = comps[0].chart
    r1 = comps[1]
    r1j = [r1.coefficient_in("q1", j) for j in range(s)]
    if s and not r1.coefficient_in("q1", s).is_zero():
        raise ConsistencyError("q1^s coefficient of r1 survived the flattening")
    rest = r1
    for j, c in enumerate(r1j):
        rest = rest - c * Jet.var(ch, "q1", N) ** j if j else rest - c
    psi = rest
    for _ in range(s + 1):
        psi = psi.divide_by("q1")
    if psi.eval0() == 0:
        raise ConsistencyError("psi(0) = 0 after reduction")
    odd, even = [], []
    certs = {}
    for m in range(1, n):
        ro = comps[2 * m + 1]
        if ro.gradient0()[ch.index[f"q{m + 1}"]] == 0:
            raise ConsistencyError(f"d r_{2 * m + 1}/d q{m + 1} vanishes at 0")
        re = comps[2 * m] - Jet.var(ch, f"p{m + 1}", N)
        odd.append(ro)
        even.append(re)
        for label, jet, idx in ((f"r{2 * m + 1}", ro, 2 * m + 1), (f"r{2 * m}~", re, 2 * m)):
            cert = ideal_membership(jet, idx)
            if not cert.member:
                raise ConsistencyError(f"{label} is not in m{idx}: {cert.offending}")
            certs[label] = cert
    return WhitneyModuli(s, n, psi, r1j, odd, even, certs, MapJet(comps), N - s - 1,
                         r1j_independent(r1j))


def r1j_independent(r1j):
    """``d r_{1,0} ^ ... ^ d r_{1,s-1} (0) != 0`` (vacuous for s = 0).

    Not implied by conditions (a)-(c): ``(p1, q1^2)`` passes them with
    ``r_{1,0} = 0``.
    """
    if not r1j:
        return True
    ch = r1j[0].chart
    hat = [v for v in ch.names if v != "q1"]
    return rank([_grad(j, hat) for j in r1j]) == len(r1j)


def is_whitney_normal_form(r, s):
    """Shape check for the symplectic normal form; returns a list of failures."""
    r = _as_map(r)
    ch = r.chart
    N = r.order
    fails = []
    if not r[0].equal_to_order(Jet.var(ch, "p1", N), N):
        fails.append("r0 != p1")
    r1 = r[1]
    if s and not r1.coefficient_in("q1", s).is_zero():
        fails.append(f"r1 has a q1^{s} term")
    try:
        rest = r1
        for j in range(s):
            c = r1.coefficient_in("q1", j)
            if c.eval0() != 0:
                fails.append(f"r_(1,{j})(0) != 0")
            rest = rest - (c * Jet.var(ch, "q1", N) ** j if j else c)
        psi = rest
        for _ in range(s + 1):
            psi = psi.divide_by("q1")
        if psi.eval0() == 0:
            fails.append("psi(0) = 0")
    except ValueError:
        fails.append(f"r1 - sum r_(1,j) q1^j is not divisible by q1^{s + 1}")
    for m in range(1, r.n):
        if not ideal_membership(r[2 * m + 1], 2 * m + 1).member:
            fails.append(f"r{2 * m + 1} not in m{2 * m + 1}")
        if r[2 * m + 1].gradient0()[ch.index[f"q{m + 1}"]] == 0:
            fails.append(f"d r{2 * m + 1}/d q{m + 1}(0) = 0")
        if not ideal_membership(r[2 * m] - Jet.var(ch, f"p{m + 1}", N), 2 * m).member:
            fails.append(f"r{2 * m} - p{m + 1} not in m{2 * m}")
    return fails


# -- ordinary (non-symplectic) reduction ------------------------------------------

def _rational_root(x, k):
    """Exact ``x^(1/k)`` when it is rational, else None."""
    x = Fraction(x)
    if x < 0 and k % 2 == 0:
        return None
    sign = -1 if x < 0 else 1
    num, den = abs(x.numerator), x.denominator

    def iroot(v):
        r = round(v ** (1.0 / k))
        for c in (r - 1, r, r + 1):
            if c >= 0 and c ** k == v:
                return c
        return None

    a, b = iroot(num), iroot(den)
    if a is None or b is None:
        return None
    return sign * Fraction(a, b)


def _prepare_r1(comps, s, N):
    """Substitution ``q1 -> T`` making ``r1 = psi0 q1^(s+1) + sum_{j<s} b_j q1^j``.

    Works on the chart with weight 1 for ``q1`` and ``s + 1`` for the other
    variables, reading the input as an exact polynomial; every weighted
    step removes one weight from the error.
    """
    ch = comps[0].chart
    w = s + 1
    wch = ch.with_weights([1 if v == "q1" else w for v in ch.names])
    W = w * N
    F = comps[1].to_chart(wch, W, exact=True)
    psi0 = F.coefficient(tuple(w if v == "q1" else 0 for v in ch.names))
    psi0 = as_fmpq(psi0)
    lead = (s + 1) * psi0
    sub = list(Jet.coords(wch, W))
    qi = ch.index["q1"]
    T = sub[qi]
    for k in range(w + 1, W + 1):
        Fk = F.homogeneous(k)
        # monomials with q1-degree >= s are removed by q1 -> q1 + tau
        hi = Jet.from_dict(wch, {e: c for e, c in Fk.terms() if e[qi] >= s}, W)
        if hi.is_zero():
            continue
        tau = hi
        for _ in range(s):
            tau = tau.divide_by("q1")
        tau = tau.with_order(W).scale(-1 / lead)
        step = list(sub)
        step[qi] = sub[qi] + tau
        F = compose(F, step)
        T = compose(T, step)
    Tstd = Jet.from_poly(ch, T.poly().project_to_context(ch.ctx), N + 1)
    return Tstd, psi0


def reduce_R(r, s=None, N=None):
    """Normal form under ordinary source diffeomorphisms.

    Brings ``r`` to ``(p1, c q1^(s+1) + sum_{j<s} r_{1,j}(qhat_1) q1^j,
    p2 + ..., ..., qn + ...)`` where ``c = 1`` whenever ``psi(0)`` has a
    rational ``(s+1)``-th root and ``c = psi(0)`` otherwise.  The dots
    in the remaining components lie in the ideal ``<q1>``.  For ``s = 0``
    the normal form is the identity.

    Returns
    -------
    normal : MapJet
    phi : DiffeoJet
        ``r o phi = normal`` to order ``valid``.
    valid : int
        Order to which ``normal`` depends only on the jet of ``r``.

    Examples
    --------
    >>> from hamsec.parsing import parse_map
    >>> r = MapJet(parse_map("p1; q1^2 + p1*q1", Chart.reduced(1), 5))
    >>> nf, phi, valid = reduce_R(r)
    >>> str(nf[1])
    '-1/4*p1^2 + q1^2'
    """
    r = _as_map(r)
    mod, phi = reduce_R_omega(r, s, N)
    s = mod.s
    if s == 0:
        # a diffeomorphism is R-equivalent to the identity through its inverse
        r = r.truncate(mod.normal_form.order)
        chi = invert(DiffeoJet([r[i] for i in _slot_of(r.chart)]))
        return MapJet.identity(r.n, r.order), chi, r.order
    comps = list(mod.normal_form)
    N = mod.normal_form.order
    ch = comps[0].chart
    T, psi0 = _prepare_r1(comps, s, N)
    root = _rational_root(to_fraction(psi0), s + 1)
    if root is not None:
        T = compose(T, [Jet.var(ch, v, N + 1).scale(root) if v == "q1" else Jet.var(ch, v, N + 1)
                        for v in ch.names]) if root != 1 else T
    tau = [T if v == "q1" else Jet.var(ch, v, N + 1) for v in ch.names]
    comps = [compose(c, tau).truncate(N) for c in comps]
    # straighten the other components along the fibres of q1
    rho = []
    for v, i in zip(ch.names, _slot_of(ch)):
        rho.append(Jet.var(ch, "q1", N) if v == "q1" else comps[i].subs_zero("q1"))
    chi = invert(DiffeoJet(rho)).components
    comps = [compose(c, list(chi)).truncate(N) for c in comps]
    total = [compose(compose(c, tau), list(chi)) for c in phi.components]
    valid = N // (s + 1)
    return MapJet(comps), DiffeoJet(total), valid


def _slot_of(ch):
    """Map component index for each reduced variable: p_i <- r_{2i-2}, q_i <- r_{2i-1}."""
    out = []
    for v in ch.names:
        i = int(v[1:])
        out.append(2 * i - 2 if v[0] == "p" else 2 * i - 1)
    return out
