"""Differential forms of degree 0..3 with jet coefficients.

A :class:`FormJet` maps strictly increasing tuples of variable indices to
:class:`~hamsec.jets.Jet` coefficients.  ``dz_I`` for ``I = (i, j)`` is
``dz_i ^ dz_j``.  Vector fields are plain tuples of jets, one per chart
variable.
"""

from itertools import combinations

import flint

from .errors import ChartMismatch, FormError
from .jets import Jet, as_fmpq

__all__ = [
    "FormJet", "d", "wedge", "interior", "pullback", "rank_at_origin",
    "is_closed", "homotopy_primitive", "lie_derivative", "lie_series_form",
    "standard_symplectic",
]

MAX_DEGREE = 3


def _sort_sign(idx):
    """Sort a tuple of indices; return (sign, sorted) or (0, None) on repeats."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0, None
    sign = 1
    # bubble sort is fine for length <= 3
    for i in range(len(idx)):
        for j in range(len(idx) - 1 - i):
            if idx[j] > idx[j + 1]:
                idx[j], idx[j + 1] = idx[j + 1], idx[j]
                sign = -sign
    return sign, tuple(idx)


class FormJet:
    """A differential form ``sum_I a_I dz_I`` on a chart.

    Parameters
    ----------
    chart : Chart
    degree : int
        0 to 3.
    comps : dict, optional
        ``{index tuple or name tuple: Jet}``.  Keys are normalized to
        increasing index tuples, with the sign of the permutation.
    order : int, optional
        Common order of the coefficients.  Defaults to the minimum over
        the given coefficients; required when ``comps`` is empty.
    """

    __slots__ = ("chart", "degree", "order", "_c")

    def __init__(self, chart, degree, comps=None, order=None):
        if not 0 <= degree <= MAX_DEGREE:
            raise FormError(f"degree {degree} outside 0..{MAX_DEGREE}")
        if degree > chart.dim:
            raise FormError(f"degree {degree} exceeds chart dimension {chart.dim}")
        comps = comps or {}
        if order is None:
            if not comps:
                raise FormError("order needed for an empty form")
            order = min(c.order for c in comps.values())
        self.chart, self.degree, self.order = chart, degree, order
        out = {}
        for key, jet in comps.items():
            if not isinstance(jet, Jet):
                jet = Jet.const(chart, order, jet)
            if jet.chart is not chart:
                raise ChartMismatch("coefficient on a different chart")
            key = tuple(chart.index[k] if isinstance(k, str) else int(k) for k in key)
            if len(key) != degree:
                raise FormError(f"key {key} does not match degree {degree}")
            sign, skey = _sort_sign(key)
            if sign == 0:
                continue
            jet = jet.truncate(order)
            if jet.order < order:
                raise FormError("coefficient order below the form order")
            jet = jet if sign > 0 else -jet
            out[skey] = out[skey] + jet if skey in out else jet
        self._c = {k: v for k, v in out.items() if not v.is_zero()}

    # -- construction ----------------------------------------------------------
    @classmethod
    def zero(cls, chart, degree, order):
        return cls(chart, degree, {}, order)

    @classmethod
    def function(cls, a):
        return cls(a.chart, 0, {(): a}, a.order)

    @classmethod
    def dz(cls, chart, names, order):
        """The constant form ``dz_{names[0]} ^ ...``."""
        return cls(chart, len(names), {tuple(names): Jet.const(chart, order, 1)}, order)

    # -- inspection --------------------------------------------------------------
    @property
    def components(self):
        return dict(self._c)

    def __getitem__(self, key):
        key = tuple(self.chart.index[k] if isinstance(k, str) else k for k in key)
        sign, skey = _sort_sign(key)
        if sign == 0:
            return Jet.zero(self.chart, self.order)
        c = self._c.get(skey, Jet.zero(self.chart, self.order))
        return c if sign > 0 else -c

    def is_zero(self):
        return not self._c

    def truncate(self, order):
        if order >= self.order:
            return self
        return FormJet(self.chart, self.degree, {k: v.truncate(order) for k, v in self._c.items()}, order)

    def __eq__(self, other):
        if not isinstance(other, FormJet):
            return NotImplemented
        if (self.chart, self.degree) != (other.chart, other.degree):
            return False
        N = min(self.order, other.order)
        return (self.truncate(N) - other.truncate(N)).is_zero()

    def __hash__(self):
        return hash((self.chart, self.degree, self.order, tuple(sorted(self._c))))

    def __repr__(self):
        if not self._c:
            return f"FormJet(0, degree={self.degree}, order={self.order})"
        parts = []
        for k in sorted(self._c):
            dz = "^".join("d" + self.chart.names[i] for i in k)
            parts.append(f"({self._c[k].to_str()})" + (f" {dz}" if dz else ""))
        return f"FormJet({' + '.join(parts)}, order={self.order})"

    # -- linear structure -------------------------------------------------------------
    def _same(self, other):
        if not isinstance(other, FormJet):
            raise TypeError("expected a FormJet")
        if self.chart is not other.chart:
            raise ChartMismatch(f"{self.chart!r} vs {other.chart!r}")
        if self.degree != other.degree:
            raise FormError("degrees differ")

    def __add__(self, other):
        self._same(other)
        N = min(self.order, other.order)
        out = {k: v.truncate(N) for k, v in self._c.items()}
        for k, v in other._c.items():
            out[k] = out[k] + v if k in out else v.truncate(N)
        return FormJet(self.chart, self.degree, out, N)

    def __neg__(self):
        return FormJet(self.chart, self.degree, {k: -v for k, v in self._c.items()}, self.order)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        c = as_fmpq(c)
        return FormJet(self.chart, self.degree, {k: v.scale(c) for k, v in self._c.items()}, self.order)

    def times(self, a):
        """Multiply every coefficient by the function jet ``a``."""
        comps = {k: v * a for k, v in self._c.items()}
        N = min([self.order, a.order] + [v.order for v in comps.values()])
        return FormJet(self.chart, self.degree, comps, N)

    def constant_matrix(self):
        """Antisymmetric matrix of a 2-form at 0, as an ``fmpq_mat``."""
        if self.degree != 2:
            raise FormError("constant_matrix needs a 2-form")
        n = self.chart.dim
        M = flint.fmpq_mat(n, n)
        for (i, j), c in self._c.items():
            v = as_fmpq(c.eval0())
            M[i, j] = v
            M[j, i] = -v
        return M


# -- exterior calculus ------------------------------------------------------------------

def d(a):
    """Exterior derivative; the order drops by the largest variable weight."""
    if a.degree + 1 > min(MAX_DEGREE, a.chart.dim):
        raise FormError("exterior derivative would overflow the degree cap")
    ch = a.chart
    N = a.order - max(ch.weights)
    out = {}
    for key, c in a._c.items():
        for j in range(ch.dim):
            if j in key:
                continue
            dc = c.partial(j)
            if dc.is_zero():
                continue
            out[(j,) + key] = out[(j,) + key] + dc if (j,) + key in out else dc
    return FormJet(ch, a.degree + 1, {k: v.truncate(N) for k, v in out.items()}, max(N, -1))


def wedge(a, b):
    if a.chart is not b.chart:
        raise ChartMismatch("wedge of forms on different charts")
    deg = a.degree + b.degree
    if deg > min(MAX_DEGREE, a.chart.dim):
        raise FormError(f"wedge degree {deg} overflows")
    out = {}
    N = None
    for ka, ca in a._c.items():
        for kb, cb in b._c.items():
            sign, key = _sort_sign(ka + kb)
            if sign == 0:
                continue
            t = ca * cb
            N = t.order if N is None else min(N, t.order)
            t = t if sign > 0 else -t
            out[key] = out[key] + t if key in out else t
    if N is None:
        N = min(a.order, b.order)
    return FormJet(a.chart, deg, out, N)


def interior(V, a):
    """Contraction ``V _| a`` of a vector field (tuple of jets) with a form."""
    ch = a.chart
    if len(V) != ch.dim:
        raise ValueError("vector field arity does not match the chart")
    if a.degree == 0:
        raise FormError("cannot contract a 0-form")
    out = {}
    N = None
    for key, c in a._c.items():
        for pos, i in enumerate(key):
            # products track their own order (a degree-raising V gains precision)
            t = V[i] * c
            N = t.order if N is None else min(N, t.order)
            if t.is_zero():
                continue
            if pos % 2:
                t = -t
            rest = key[:pos] + key[pos + 1:]
            out[rest] = out[rest] + t if rest in out else t
    if N is None:
        N = min([a.order] + [v.order for v in V])
    return FormJet(ch, a.degree - 1, out, N)


def _differentials(phi):
    """``d(phi_i)`` for every component, as 1-forms on the source chart."""
    src = phi.source
    return [FormJet(src, 1, {(j,): c.partial(j) for j in range(src.dim)}, c.order - max(src.weights))
            for c in phi.components]


def pullback(phi, a):
    """``phi^* a`` for a map germ ``phi`` whose target chart is ``a.chart``."""
    if phi.target is not a.chart:
        raise ChartMismatch("map target differs from the form's chart")
    src = phi.source
    diffs = _differentials(phi) if a.degree else []
    out = None
    for key, c in a._c.items():
        term = FormJet.function(c.compose(phi))
        for i in key:
            term = wedge(term, diffs[i])
        out = term if out is None else out + term
    if out is None:
        N = min([a.order] + [f.order for f in diffs]) if diffs else min(a.order, phi.order)
        return FormJet.zero(src, a.degree, N)
    return out


def rank_at_origin(a):
    """Rank of the constant antisymmetric matrix of a 2-form."""
    return a.constant_matrix().rank()


def is_closed(a):
    """``d a == 0`` to the tracked order (degree-3 forms count as closed)."""
    if a.degree + 1 > min(MAX_DEGREE, a.chart.dim):
        return True
    return d(a).is_zero()


def _euler_scaled(a):
    """Divide each monomial term of ``a`` by its total weight (coefficient plus dz's)."""
    ch = a.chart
    w = ch.weights
    out = {}
    for key, c in a._c.items():
        base = sum(w[i] for i in key)
        comps = []
        for deg, poly in enumerate(c.components):
            tot = deg + base
            comps.append(poly if tot == 0 or poly.is_zero() else poly * (1 / flint.fmpq(tot)))
        out[key] = Jet(ch, c.order, comps)
    return FormJet(ch, a.degree, out, a.order)


def homotopy_primitive(a, check=True):
    """A primitive ``beta`` with ``d beta = a`` for a closed form.

    Radial homotopy: divide every monomial term by its (weighted) total
    degree, then contract with the Euler field ``sum w_i z_i d/dz_i``.
    On standard charts a degree-``m`` coefficient of a ``p``-form is
    divided by ``m + p``.

    Raises
    ------
    FormError
        If ``a`` is not closed, or is a 0-form.
    """
    if a.degree == 0:
        raise FormError("0-forms have no primitive")
    if check and not is_closed(a):
        raise FormError("input form is not closed")
    ch = a.chart
    wmax = max(ch.weights)
    scaled = _euler_scaled(a)
    E = tuple(Jet.var(ch, v, a.order + wmax).scale(ch.weights[i]) for i, v in enumerate(ch.names))
    beta = interior(E, scaled)
    return beta


def lie_derivative(V, a):
    """Cartan formula ``L_V a = d(V _| a) + V _| d a``."""
    out = d(interior(V, a)) if a.degree else None
    if a.degree + 1 <= min(MAX_DEGREE, a.chart.dim):
        t = interior(V, d(a))
        out = t if out is None else out + t
    if out is None:
        raise FormError("Lie derivative of this degree is not supported")
    return out


def standard_symplectic(chart, order):
    """``dx^dy + sum dp_i^dq_i`` (the (x, y) block only on full charts)."""
    comps = {}
    one = Jet.const(chart, order, 1)
    if chart.kind == "full":
        comps[("x", "y")] = one
    for pv, qv in chart.pq_pairs():
        comps[(pv, qv)] = one
    return FormJet(chart, 2, comps, order)


def exact_two_form(beta):
    """``d beta`` for a 1-form, a convenience used by generators and tests."""
    if beta.degree != 1:
        raise FormError("expected a 1-form")
    return d(beta)


def all_keys(chart, degree):
    """Every increasing index tuple of the given length."""
    return list(combinations(range(chart.dim), degree))


def lie_series_form(V, a, t=1, closed=False, max_terms=64):
    """``exp(t L_V) a``: pull-back of ``a`` by the time-``t`` flow of ``V``.

    Intended for degree-raising fields, where the series is finite at
    the tracked order.  With ``closed=True`` the Cartan formula is
    shortened to ``d(V _| a)``, which stays valid term by term.
    """
    t = as_fmpq(t)
    out = a
    term = a
    for j in range(1, max_terms + 1):
        step = d(interior(V, term)) if closed else lie_derivative(V, term)
        term = step.scale(t / j)
        if term.is_zero() or term.order < 0:
            break
        if min(c.valuation() for c in term._c.values()) > out.order:
            break
        out = out + term
    else:
        raise FormError("Lie series of a form did not terminate")
    return out
