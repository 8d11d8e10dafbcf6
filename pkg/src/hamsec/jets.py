"""Truncated multivariate power series with exact rational coefficients.

A :class:`Jet` stores a polynomial in the variables of a :class:`Chart`,
split into homogeneous components by (weighted) degree, and remembers the
order ``N`` up to which it is known.  Coefficients are exact rationals;
the heavy lifting is done by ``flint.fmpq_mpoly``.

Charts come in three flavours, with a fixed variable order:

* ``full``    : x, y, p1..pn, q1..qn
* ``orbit``   : y, p1..pn, q1..qn
* ``reduced`` : p1..pn, q1..qn

A chart may carry integer weights.  All weights are 1 unless stated
otherwise; weighted charts are used by the normalizer, where ``x`` has
weight 1 and the remaining variables weight ``k + 1``.
"""

from fractions import Fraction
from functools import lru_cache
from math import ceil

import flint

from .errors import ChartMismatch, PrecisionError, SingularLinearPart

__all__ = [
    "Chart", "Jet", "DiffeoJet", "as_fmpq", "to_fraction",
    "add", "mul", "partial", "compose", "invert", "eval0",
    "divide_by_ideal_y",
]

_KINDS = ("full", "orbit", "reduced")


def as_fmpq(c):
    """Convert an int, Fraction, str or fmpq to ``flint.fmpq``."""
    if isinstance(c, flint.fmpq):
        return c
    if isinstance(c, (int, flint.fmpz)):
        return flint.fmpq(c)
    if isinstance(c, Fraction):
        return flint.fmpq(c.numerator, c.denominator)
    if isinstance(c, str):
        f = Fraction(c)
        return flint.fmpq(f.numerator, f.denominator)
    raise TypeError(f"cannot convert {type(c).__name__} to a rational")


def to_fraction(c):
    """Convert an fmpq (or int) to ``fractions.Fraction``."""
    if isinstance(c, flint.fmpq):
        return Fraction(int(c.p), int(c.q))
    return Fraction(c)


@lru_cache(maxsize=None)
def _context(names):
    return flint.fmpq_mpoly_ctx.get(names, "degrevlex")


class Chart:
    """A named coordinate chart of the model ``dx^dy + sum dp_i^dq_i``.

    Parameters
    ----------
    n : int
        Number of (p_i, q_i) pairs, ``n >= 1``... or 0 for toy charts.
    kind : {"full", "orbit", "reduced"}
    weights : tuple of int, optional
        Grading weights, one per variable.  Defaults to all ones.

    Charts are interned: ``Chart(1, "full") is Chart(1, "full")``.
    """

    __slots__ = ("n", "kind", "weights", "names", "ctx", "index", "__weakref__")
    _cache = {}

    def __new__(cls, n, kind="full", weights=None):
        if kind not in _KINDS:
            raise ValueError(f"unknown chart kind {kind!r}")
        if n < 0:
            raise ValueError("n must be non-negative")
        names = _chart_names(n, kind)
        if weights is None:
            weights = (1,) * len(names)
        weights = tuple(int(w) for w in weights)
        if len(weights) != len(names) or min(weights, default=1) < 1:
            raise ValueError("weights must be positive, one per variable")
        key = (n, kind, weights)
        obj = cls._cache.get(key)
        if obj is None:
            obj = object.__new__(cls)
            obj.n, obj.kind, obj.weights, obj.names = n, kind, weights, names
            obj.ctx = _context(names)
            obj.index = {v: i for i, v in enumerate(names)}
            cls._cache[key] = obj
        return obj

    @classmethod
    def full(cls, n):
        return cls(n, "full")

    @classmethod
    def orbit(cls, n):
        return cls(n, "orbit")

    @classmethod
    def reduced(cls, n):
        return cls(n, "reduced")

    @property
    def dim(self):
        return len(self.names)

    @property
    def standard(self):
        """True when every weight equals 1."""
        return all(w == 1 for w in self.weights)

    def with_weights(self, weights):
        return Chart(self.n, self.kind, weights)

    def unweighted(self):
        return Chart(self.n, self.kind)

    def section_weights(self, k):
        """Weighted full chart with wt(x) = 1 and wt(others) = k + 1."""
        if self.kind != "full":
            raise ChartMismatch("section weights only make sense on the full chart")
        return Chart(self.n, "full", (1,) + (k + 1,) * (self.dim - 1))

    def p(self, i):
        return f"p{i}"

    def q(self, i):
        return f"q{i}"

    def pq_pairs(self):
        return [(f"p{i}", f"q{i}") for i in range(1, self.n + 1)]

    def __reduce__(self):
        return (Chart, (self.n, self.kind, self.weights))

    def __repr__(self):
        w = "" if self.standard else f", weights={self.weights}"
        return f"Chart({self.n}, {self.kind!r}{w})"


def _chart_names(n, kind):
    pq = tuple(f"p{i}" for i in range(1, n + 1)) + tuple(f"q{i}" for i in range(1, n + 1))
    if kind == "full":
        return ("x", "y") + pq
    if kind == "orbit":
        return ("y",) + pq
    return pq


def _wdeg(exp, weights):
    return sum(e * w for e, w in zip(exp, weights))


class Jet:
    """A polynomial truncated at (weighted) order ``N`` on a chart.

    The value is immutable.  Components are kept in a tuple indexed by
    degree; ``order == -1`` means nothing is known (for example after
    differentiating an order-0 jet).

    Parameters
    ----------
    chart : Chart
    order : int
    comps : sequence of fmpq_mpoly, optional
        Homogeneous components of degree 0..order.  Callers are trusted
        to pass components that are really homogeneous.
    """

    __slots__ = ("chart", "order", "_c")

    def __init__(self, chart, order, comps=None):
        order = int(order)
        if order < -1:
            order = -1
        self.chart = chart
        self.order = order
        zero = chart.ctx.from_dict({})
        if comps is None:
            self._c = (zero,) * (order + 1)
        else:
            comps = list(comps[: order + 1])
            comps += [zero] * (order + 1 - len(comps))
            self._c = tuple(comps)

    # -- construction -------------------------------------------------
    @classmethod
    def zero(cls, chart, order):
        return cls(chart, order)

    @classmethod
    def const(cls, chart, order, value):
        if order < 0:
            return cls(chart, order)
        c = [chart.ctx.from_dict({})] * (order + 1)
        c[0] = chart.ctx.constant(as_fmpq(value))
        return cls(chart, order, c)

    @classmethod
    def var(cls, chart, name, order):
        i = chart.index[name]
        return cls.from_poly(chart, chart.ctx.gens()[i], order)

    @classmethod
    def coords(cls, chart, order):
        """Coordinate functions of the chart, in chart order."""
        return [cls.var(chart, v, order) for v in chart.names]

    @classmethod
    def from_poly(cls, chart, poly, order):
        """Split a flint polynomial into components, dropping degree > order."""
        if poly.context() is not chart.ctx:
            poly = poly.project_to_context(chart.ctx)
        buckets = {}
        w = chart.weights
        for exp, c in poly.terms():
            d = _wdeg(exp, w)
            if d <= order:
                buckets.setdefault(d, {})[exp] = c
        ctx = chart.ctx
        comps = [ctx.from_dict(buckets[d]) if d in buckets else ctx.from_dict({})
                 for d in range(order + 1)]
        return cls(chart, order, comps)

    @classmethod
    def from_dict(cls, chart, coeffs, order):
        """Build from ``{exponent tuple: rational}``; zero entries are ignored."""
        poly = chart.ctx.from_dict({tuple(e): as_fmpq(c) for e, c in coeffs.items() if c != 0})
        return cls.from_poly(chart, poly, order)

    @classmethod
    def from_components(cls, chart, order, comps):
        return cls(chart, order, comps)

    # -- inspection -------------------------------------------------------
    @property
    def components(self):
        return self._c

    def poly(self):
        """The whole jet as a single flint polynomial."""
        out = self.chart.ctx.from_dict({})
        for c in self._c:
            if not c.is_zero():
                out += c
        return out

    def component(self, d):
        if d < 0 or d > self.order:
            return self.chart.ctx.from_dict({})
        return self._c[d]

    def is_zero(self):
        return all(c.is_zero() for c in self._c)

    def valuation(self):
        """Lowest degree with a nonzero component; ``order + 1`` if zero."""
        for d, c in enumerate(self._c):
            if not c.is_zero():
                return d
        return self.order + 1

    def to_dict(self):
        """``{exponent tuple: Fraction}`` of all stored coefficients."""
        out = {}
        for c in self._c:
            for exp, v in c.terms():
                out[tuple(exp)] = to_fraction(v)
        return out

    def terms(self):
        """Iterate ``(exponent tuple, fmpq)`` in degree order."""
        for c in self._c:
            yield from c.terms()

    def nterms(self):
        return sum(len(c) for c in self._c)

    def coefficient(self, exp):
        exp = tuple(exp)
        d = _wdeg(exp, self.chart.weights)
        if d > self.order:
            raise PrecisionError(f"monomial of degree {d} beyond order {self.order}")
        return self._coef_in(self._c[d], exp)

    def eval0(self):
        """Constant coefficient as a Fraction."""
        if self.order < 0:
            raise PrecisionError("value at 0 unknown: jet carries no information")
        c0 = self._c[0]
        if c0.is_zero():
            return Fraction(0)
        return to_fraction(c0.leading_coefficient())

    def linear_part(self):
        """Coefficients of the degree-one monomials, as Fractions, per variable.

        Only meaningful on standard charts (or for variables of weight 1).
        """
        w = self.chart.weights
        out = [Fraction(0)] * self.chart.dim
        for i, wi in enumerate(w):
            if wi > self.order:
                continue
            exp = [0] * self.chart.dim
            exp[i] = 1
            out[i] = self._coef_in(self._c[wi], tuple(exp))
        return out

    def gradient0(self):
        """Alias of :meth:`linear_part`: the differential at the origin."""
        return self.linear_part()

    @staticmethod
    def _coef_in(poly, exp):
        for e, v in poly.terms():
            if tuple(e) == exp:
                return to_fraction(v)
        return Fraction(0)

    # -- truncation / precision ------------------------------------------
    def truncate(self, order):
        """Drop components above ``order`` (never raises the order)."""
        if order >= self.order:
            return self
        return Jet(self.chart, order, self._c[: max(order, -1) + 1])

    def with_order(self, order):
        """Same coefficients, order set to ``order``.

        Raising the order asserts the missing components are zero; use
        only for exact polynomials.
        """
        if order <= self.order:
            return self.truncate(order)
        return Jet(self.chart, order, self._c)

    def homogeneous(self, d):
        """The degree-``d`` part as a jet of the same order."""
        comps = [self.chart.ctx.from_dict({})] * (self.order + 1)
        if 0 <= d <= self.order:
            comps[d] = self._c[d]
        return Jet(self.chart, self.order, comps)

    def _check(self, other):
        if self.chart is not other.chart:
            raise ChartMismatch(f"{self.chart!r} vs {other.chart!r}")

    # -- ring operations ---------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return other
        return Jet.const(self.chart, self.order, other)

    def __add__(self, other):
        other = self._coerce(other)
        N = min(self.order, other.order)
        return Jet(self.chart, N, [a + b for a, b in zip(self._c[: N + 1], other._c[: N + 1])])

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.chart, self.order, [-c for c in self._c])

    def __sub__(self, other):
        other = self._coerce(other)
        N = min(self.order, other.order)
        return Jet(self.chart, N, [a - b for a, b in zip(self._c[: N + 1], other._c[: N + 1])])

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c):
        c = as_fmpq(c)
        if c == 0:
            return Jet.zero(self.chart, self.order)
        return Jet(self.chart, self.order, [x * c for x in self._c])

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        self._check(other)
        return _mul(self, other)

    def __rmul__(self, other):
        return self.scale(other)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.inverse()
        return self.scale(1 / as_fmpq(other))

    def __pow__(self, e):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        result = Jet.const(self.chart, self.order, 1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __eq__(self, other):
        if not isinstance(other, Jet):
            if self.order < 0:
                return False
            return self == Jet.const(self.chart, self.order, other)
        return (self.chart is other.chart and self.order == other.order
                and all(a == b for a, b in zip(self._c, other._c)))

    def equal_to_order(self, other, order):
        """Coefficient-wise equality of components up to ``order``."""
        self._check(other)
        if order > min(self.order, other.order):
            raise PrecisionError("comparison beyond tracked order")
        return all(self._c[d] == other._c[d] for d in range(order + 1))

    def __hash__(self):
        return hash((self.chart, self.order, tuple(str(c) for c in self._c)))

    def inverse(self):
        """Multiplicative inverse of a unit (nonzero constant term)."""
        c0 = self.eval0()
        if c0 == 0:
            raise ZeroDivisionError("jet is not a unit")
        inv0 = 1 / as_fmpq(c0)
        delta = self.scale(inv0) - 1          # in the maximal ideal
        result = Jet.const(self.chart, self.order, 1)
        term = Jet.const(self.chart, self.order, 1)
        v = delta.valuation()
        if v <= self.order:
            for _ in range(self.order // max(v, 1)):
                term = -(term * delta)
                if term.is_zero():
                    break
                result = result + term
        return result.scale(inv0)

    # -- calculus ---------------------------------------------------------
    def partial(self, v):
        """Formal partial derivative; the order drops by the weight of ``v``."""
        try:
            i = self.chart.index[v] if isinstance(v, str) else int(v)
        except KeyError:
            raise ChartMismatch(f"unknown variable {v!r} on {self.chart!r}") from None
        w = self.chart.weights[i]
        N = self.order - w
        if N < 0:
            return Jet(self.chart, -1)
        return Jet(self.chart, N, [self._c[d + w].derivative(i) for d in range(N + 1)])

    def integrate(self, v):
        """Antiderivative in ``v`` with zero constant; order rises by wt(v)."""
        i = self.chart.index[v] if isinstance(v, str) else int(v)
        w = self.chart.weights[i]
        zero = self.chart.ctx.from_dict({})
        comps = [zero] * w + [c.integral(i) for c in self._c]
        return Jet(self.chart, self.order + w, comps)

    def subs_zero(self, names):
        """Set the listed variables to 0 (same chart)."""
        names = [names] if isinstance(names, str) else list(names)
        if not names:
            return self
        m = {v: 0 for v in names}
        return Jet(self.chart, self.order, [c.subs(m) if not c.is_zero() else c for c in self._c])

    def divide_by(self, v):
        """Exact division by a variable; every term must contain it."""
        i = self.chart.index[v]
        w = self.chart.weights[i]
        g = self.chart.ctx.gens()[i]
        comps = []
        for d in range(w, self.order + 1):
            c = self._c[d]
            if c.is_zero():
                comps.append(c)
                continue
            qt, rm = divmod(c, g)
            if not rm.is_zero():
                raise ValueError(f"jet is not divisible by {v}")
            comps.append(qt)
        if any(not self._c[d].is_zero() for d in range(min(w, self.order + 1))):
            raise ValueError(f"jet is not divisible by {v}")
        return Jet(self.chart, self.order - w, comps)

    def coefficient_in(self, v, e):
        """Coefficient of ``v**e`` as a jet not involving ``v``."""
        i = self.chart.index[v]
        w = self.chart.weights[i]
        out = []
        fact = flint.fmpq(1)
        for j in range(2, e + 1):
            fact *= j
        inv = 1 / fact
        N = self.order - e * w
        for d in range(N + 1):
            c = self._c[d + e * w]
            if c.is_zero():
                out.append(c)
                continue
            for _ in range(e):
                c = c.derivative(i)
            out.append(c.subs({v: 0}) * inv)
        return Jet(self.chart, N, out)

    def degree_in(self, v):
        i = self.chart.index[v]
        return max((c.degrees()[i] for c in self._c if not c.is_zero()), default=-1)

    def split_by(self, v):
        """``{e: coefficient of v**e}`` with coefficients free of ``v``."""
        return {e: self.coefficient_in(v, e) for e in range(self.degree_in(v) + 1)}

    # -- change of chart -----------------------------------------------------
    def to_chart(self, chart, order=None, exact=False):
        """Move to another chart sharing the variables that occur.

        Variables absent from the target must not occur.  When the
        degree of every occurring variable scales by a common factor
        ``lam`` (for example standard -> section weights), components
        are moved without per-term work; otherwise terms are re-binned.

        With ``exact=True`` the jet is read as an exact polynomial and
        the result has exactly the requested ``order``.
        """
        src = self.chart
        if exact:
            if order is None:
                raise ValueError("exact conversion needs an explicit order")
            return Jet.from_poly(chart, self.poly().project_to_context(chart.ctx), order)
        if chart is src:
            return self if order is None else self.truncate(order)
        used = [v for i, v in enumerate(src.names)
                if any(not c.is_zero() and c.degrees()[i] > 0 for c in self._c)]
        for v in used:
            if v not in chart.index:
                raise ChartMismatch(f"variable {v} does not exist on {chart!r}")
        ratios = {Fraction(chart.weights[chart.index[v]], src.weights[src.index[v]]) for v in used}
        lam = ratios.pop() if len(ratios) == 1 else None
        if lam is None and not ratios and not used:
            lam = Fraction(1)
        if lam is not None:
            lam_ok = lam.denominator == 1 or all(c.is_zero() for c in self._c[1:])
        if lam is not None and lam_ok:
            lam_int = int(lam) if lam.denominator == 1 else 1
            known = (self.order + 1) * lam_int - 1
            N = known if order is None else min(order, known)
            zero = chart.ctx.from_dict({})
            comps = [zero] * (N + 1)
            for d, c in enumerate(self._c):
                if c.is_zero() or d * lam_int > N:
                    continue
                comps[d * lam_int] = c.project_to_context(chart.ctx)
            return Jet(chart, N, comps)
        # general re-binning
        wmin = min(Fraction(chart.weights[chart.index[v]], src.weights[src.index[v]]) for v in used)
        known = ceil((self.order + 1) * wmin) - 1
        N = known if order is None else min(order, known)
        return Jet.from_poly(chart, self.poly().project_to_context(chart.ctx), N)

    # -- composition ----------------------------------------------------------
    def compose(self, subst, exact=False):
        return compose(self, subst, exact=exact)

    def __call__(self, *subst):
        return compose(self, list(subst))

    # -- display ---------------------------------------------------------------
    def __repr__(self):
        return f"Jet({self.to_str()}, order={self.order})"

    def to_str(self):
        p = self.poly()
        return "0" if p.is_zero() else str(p)

    __str__ = to_str


def _mul(a, b):
    """Truncated product.

    The order of the result is the tightest one justified by the
    valuations of the factors, capped at the larger input order.
    """
    va, vb = a.valuation(), b.valuation()
    N = min(a.order + vb, b.order + va, max(a.order, b.order))
    if N < 0:
        return Jet(a.chart, -1)
    ctx = a.chart.ctx
    ia = [(i, c) for i, c in enumerate(a._c) if not c.is_zero()]
    ib = [(j, c) for j, c in enumerate(b._c) if not c.is_zero()]
    out = [None] * (N + 1)
    for i, ca in ia:
        if i > N:
            break
        for j, cb in ib:
            d = i + j
            if d > N:
                break
            t = ca * cb
            out[d] = t if out[d] is None else out[d] + t
    zero = ctx.from_dict({})
    return Jet(a.chart, N, [zero if c is None else c for c in out])


# -- module-level functional API -------------------------------------------------

def add(a, b):
    return a + b


def mul(a, b):
    return a * b


def partial(a, v):
    return a.partial(v)


def eval0(a):
    return a.eval0()


def divide_by_ideal_y(a):
    """Split ``a = r + phi*y`` with ``r`` free of ``y``.

    Returns
    -------
    r : Jet
        ``a`` at ``y = 0``, same order as ``a``.
    phi : Jet
        Order ``order(a) - wt(y)``.
    """
    if "y" not in a.chart.index:
        raise ChartMismatch("chart has no y variable")
    r = a.subs_zero("y")
    phi = (a - r).divide_by("y")
    return r, phi


def _coerce_subst(a, subst):
    if isinstance(subst, DiffeoJet):
        if subst.target is not a.chart:
            raise ChartMismatch("substitution target chart differs from jet chart")
        return list(subst.components)
    subst = list(subst)
    if len(subst) != a.chart.dim:
        raise ValueError(f"arity mismatch: {len(subst)} jets for {a.chart.dim} variables")
    return subst


def compose(a, subst, exact=False):
    """Substitute jets for the variables of ``a``.

    Parameters
    ----------
    a : Jet
    subst : DiffeoJet or list of Jet
        One jet per variable of ``a.chart``, all on a common chart.
    exact : bool
        Treat ``a`` as an exact polynomial.  Required when some
        substituted jet has a nonzero constant term (evaluation at a
        point); otherwise unknown higher terms of ``a`` would leak.

    Returns
    -------
    Jet
        ``a o subst``.  The order is the largest one guaranteed by the
        orders of ``a`` and of the substituted jets.
    """
    subst = _coerce_subst(a, subst)
    if not subst:
        raise ValueError("empty substitution")
    target = subst[0].chart
    for s in subst:
        if s.chart is not target:
            raise ChartMismatch("substituted jets live on different charts")
    wsrc = a.chart.weights
    used = [i for i in range(a.chart.dim)
            if any(not c.is_zero() and c.degrees()[i] > 0 for c in a._c)]
    N = min((subst[i].order for i in used), default=min(s.order for s in subst))
    if not exact:
        vals = [subst[i].valuation() for i in range(a.chart.dim)]
        if any(vals[i] == 0 for i in used):
            raise PrecisionError("constant terms in substitution need exact=True")
        ratio = min((Fraction(vals[i], wsrc[i]) for i in range(a.chart.dim)), default=Fraction(1))
        N = min(N, ceil((a.order + 1) * ratio) - 1)
    if N < 0:
        return Jet(target, -1)
    if _is_graded_linear(subst, wsrc, target):
        return _compose_linear(a, subst, target, N)
    return _horner(a, subst, target, N)


def _is_graded_linear(subst, wsrc, target):
    """Every substituted jet is homogeneous of the weight of its variable."""
    for s, w in zip(subst, wsrc):
        if w >= len(s._c) or s.order < w:
            return False
        if any(not c.is_zero() for d, c in enumerate(s._c) if d != w):
            return False
    return True


def _compose_linear(a, subst, target, N):
    # a degree-preserving substitution maps component d to component d
    polys = [s._c[w] for s, w in zip(subst, a.chart.weights)]
    zero = target.ctx.from_dict({})
    comps = []
    for d in range(N + 1):
        c = a._c[d] if d < len(a._c) else zero
        comps.append(zero if c.is_zero() else c.compose(*polys, ctx=target.ctx))
    return Jet(target, N, comps)


def _raw_mul(a, b, N):
    """Product of raw component lists (``None`` marks a zero component)."""
    out = [None] * (N + 1)
    ia = [(i, c) for i, c in enumerate(a[: N + 1]) if c is not None]
    ib = [(j, c) for j, c in enumerate(b[: N + 1]) if c is not None]
    for i, ca in ia:
        lim = N - i
        for j, cb in ib:
            if j > lim:
                break
            t = ca * cb
            d = i + j
            out[d] = t if out[d] is None else out[d] + t
    return out


def _raw_axpy(acc, x, c):
    """``acc + c*x`` in place on raw lists (``acc`` may be longer than ``x``)."""
    for d, v in enumerate(x):
        if v is None or d >= len(acc):
            continue
        t = v * c if c != 1 else v
        acc[d] = t if acc[d] is None else acc[d] + t
    return acc


def _raw_add(acc, x):
    n = min(len(acc), len(x))
    for d in range(n):
        v = x[d]
        if v is not None:
            acc[d] = v if acc[d] is None else acc[d] + v
    return acc


def _horner(a, subst, target, N):
    """Truncated Horner evaluation over the variables of ``a``.

    Works on raw lists of homogeneous components to keep the Python
    overhead per node small; powers of the substituted jets are cached.
    """
    dim = a.chart.dim
    terms = sorted((tuple(e), v) for e, v in a.terms())
    if not terms:
        return Jet.zero(target, N)
    vals = [max(s.valuation(), 0) for s in subst]
    raw = [[None if c.is_zero() else c for c in s._c[: N + 1]] for s in subst]
    for r in raw:
        r += [None] * (N + 1 - len(r))
    cache = {}

    def power(i, e):
        key = (i, e)
        p = cache.get(key)
        if p is None:
            if e == 1:
                p = raw[i]
            else:
                h = e // 2
                p = _raw_mul(power(i, h), power(i, e - h), N)
            cache[key] = p
        return p

    def rec(lo, hi, level, order):
        # terms[lo:hi] share exponents in variables before ``level``
        if order < 0:
            return None
        if level == dim - 1:
            acc = [None] * (order + 1)
            hit = False
            for k in range(lo, hi):
                e, v = terms[k]
                e = e[level]
                if e * vals[level] > order:
                    continue
                hit = True
                if e == 0:
                    acc[0] = target.ctx.constant(v) if acc[0] is None else acc[0] + v
                else:
                    _raw_axpy(acc, power(level, e)[: order + 1], v)
            return acc if hit else None
        total = None
        k = lo
        while k < hi:
            e = terms[k][0][level]
            j = k
            while j < hi and terms[j][0][level] == e:
                j += 1
            inner = rec(k, j, level + 1, order - e * vals[level])
            if inner is not None:
                if e:
                    inner = inner + [None] * (order + 1 - len(inner))
                    term = _raw_mul(power(level, e), inner, order)
                else:
                    term = inner
                if total is None:
                    total = term + [None] * (order + 1 - len(term))
                else:
                    _raw_add(total, term)
            k = j
        return total

    out = rec(0, len(terms), 0, N)
    if out is None:
        return Jet.zero(target, N)
    zero = target.ctx.from_dict({})
    comps = [zero if c is None else c for c in out]
    comps += [zero] * (N + 1 - len(comps))
    return Jet(target, N, comps)


class DiffeoJet:
    """A map germ given by one jet per target variable.

    ``components[i]`` is the pull-back of the i-th target coordinate,
    expressed on the source chart.  For an endomorphism both charts
    coincide.

    Parameters
    ----------
    components : sequence of Jet
    target : Chart, optional
        Chart whose coordinates the components describe; defaults to
        the source chart.
    symplectic, preserves_f : bool or None
        Optional provenance flags; ``None`` means unchecked.
    """

    __slots__ = ("components", "source", "target", "symplectic", "preserves_f")

    def __init__(self, components, target=None, symplectic=None, preserves_f=None):
        comps = tuple(components)
        if not comps:
            raise ValueError("empty map")
        self.source = comps[0].chart
        for c in comps:
            if c.chart is not self.source:
                raise ChartMismatch("map components on different charts")
        self.target = target or self.source
        if len(comps) != self.target.dim:
            raise ValueError("arity mismatch")
        self.components = comps
        self.symplectic = symplectic
        self.preserves_f = preserves_f

    @classmethod
    def identity(cls, chart, order):
        return cls(Jet.coords(chart, order), symplectic=True, preserves_f=True)

    @property
    def order(self):
        return min(c.order for c in self.components)

    def __getitem__(self, name):
        return self.components[self.target.index[name]]

    def __iter__(self):
        return iter(self.components)

    def __len__(self):
        return len(self.components)

    def compose(self, other):
        """``self o other`` (apply ``other`` first)."""
        return DiffeoJet([compose(c, other) for c in self.components], target=self.target)

    def __matmul__(self, other):
        return self.compose(other)

    def truncate(self, order):
        return DiffeoJet([c.truncate(order) for c in self.components], target=self.target,
                         symplectic=self.symplectic, preserves_f=self.preserves_f)

    def linear_matrix(self):
        """Matrix of the linear part, rows = target variables (standard charts)."""
        return [c.linear_part() for c in self.components]

    def is_identity(self, order=None):
        ident = Jet.coords(self.source, self.order)
        N = self.order if order is None else order
        return all(a.truncate(N) == b.truncate(N) for a, b in zip(self.components, ident))

    def __eq__(self, other):
        return isinstance(other, DiffeoJet) and self.components == other.components

    def __repr__(self):
        body = ", ".join(f"{v} -> {c.to_str()}" for v, c in zip(self.target.names, self.components))
        return f"DiffeoJet({body}; order={self.order})"


def invert(phi):
    """Two-sided inverse of an endomorphism germ to its order.

    Uses the fixed point ``psi = L^{-1}(z - Q(psi))`` where ``L`` is the
    linear part and ``Q`` the nonlinear remainder; each sweep fixes one
    more degree.
    """
    chart = phi.source
    if phi.target is not chart:
        raise ChartMismatch("invert needs an endomorphism")
    if not chart.standard:
        raise ChartMismatch("invert works on standard charts")
    N = phi.order
    for c in phi.components:
        if c.eval0() != 0:
            raise ValueError("map does not fix the origin")
    A = flint.fmpq_mat([[as_fmpq(x) for x in row] for row in phi.linear_matrix()])
    if A.rank() < chart.dim:
        raise SingularLinearPart("linear part is singular")
    Ainv = A.inv()
    z = Jet.coords(chart, N)
    lin = [sum((z[j].scale(A[i, j]) for j in range(chart.dim) if A[i, j] != 0), Jet.zero(chart, N))
           for i in range(chart.dim)]
    nonlin = [c - l for c, l in zip(phi.components, lin)]

    def apply_inv(vec):
        return [sum((vec[j].scale(Ainv[i, j]) for j in range(chart.dim) if Ainv[i, j] != 0),
                    Jet.zero(chart, N)) for i in range(chart.dim)]

    psi = apply_inv(z)
    for _ in range(max(N - 1, 0)):
        qpsi = [compose(q, psi) if not q.is_zero() else Jet.zero(chart, N) for q in nonlin]
        psi = apply_inv([zi - qi for zi, qi in zip(z, qpsi)])
    return DiffeoJet(psi, symplectic=phi.symplectic, preserves_f=phi.preserves_f)
