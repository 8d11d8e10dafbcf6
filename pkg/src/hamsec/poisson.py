"""Poisson brackets, Hamiltonian vector fields and a flow-based oracle.

Sign convention, fixed by ``Z_f _| omega = df`` with
``omega = dx^dy + sum dp_i^dq_i``::

    {a, b} = a_y b_x - a_x b_y + sum_i (a_qi b_pi - a_pi b_qi)

so that ``{y, h} = dh/dx``.  On orbit and reduced charts the (x, y)
block is dropped; ``y`` is then a parameter.
"""

from math import factorial

import flint

from .errors import OrderExhausted, PrecisionError, Undetermined
from .jets import Jet, as_fmpq

__all__ = [
    "bracket", "hamiltonian_field", "iterated_fh", "iterated_hf",
    "apply_field", "lie_series", "flow_tangency_oracle", "first_nonvanishing",
]


def _pairs(chart):
    return chart.pq_pairs()


def bracket(a, b):
    """Poisson bracket ``{a, b}`` under the fixed convention.

    Examples
    --------
    >>> from hamsec.jets import Chart, Jet
    >>> x, y, p, q = Jet.coords(Chart.full(1), 3)
    >>> bracket(y, x*x + y + p)
    Jet(2*x, order=2)
    """
    a._check(b)
    ch = a.chart
    terms = []
    if ch.kind == "full":
        terms.append(a.partial("y") * b.partial("x"))
        terms.append(-(a.partial("x") * b.partial("y")))
    for pv, qv in _pairs(ch):
        terms.append(a.partial(qv) * b.partial(pv))
        terms.append(-(a.partial(pv) * b.partial(qv)))
    if not terms:
        return Jet.zero(ch, min(a.order, b.order) - 1)
    out = terms[0]
    for t in terms[1:]:
        out = out + t
    return out


def hamiltonian_field(a):
    """Components of ``Z_a = {a, .}``, one jet per chart variable.

    ``y`` gives ``d/dx``; ``x`` gives ``-d/dy``; on the reduced chart
    ``p1`` gives ``-d/dq1``.
    """
    ch = a.chart
    comps = {}
    if ch.kind == "full":
        comps["x"] = a.partial("y")
        comps["y"] = -a.partial("x")
    for pv, qv in _pairs(ch):
        comps[pv] = a.partial(qv)
        comps[qv] = -a.partial(pv)
    N = min((c.order for c in comps.values()), default=a.order - 1)
    return tuple(comps.get(v, Jet.zero(ch, N)) for v in ch.names)


def apply_field(field, a):
    """Directional derivative ``sum_i V_i da/dz_i``."""
    ch = a.chart
    out = None
    for v, comp in zip(ch.names, field):
        if comp.is_zero():
            continue
        t = comp * a.partial(v)
        out = t if out is None else out + t
    if out is None:
        N = min([a.order - 1] + [c.order for c in field])
        return Jet.zero(ch, max(N, -1))
    return out


def _raises_degree(field, chart):
    return all(c.valuation() > chart.weights[i] for i, c in enumerate(field))


def lie_series(field, a, t=1, max_terms=None):
    """``exp(t V) a = sum_j t^j V^j(a) / j!``, the pull-back by the time-t flow.

    The sum is finite when ``V`` raises degree (all terms vanish beyond
    the order) or when ``V`` acts nilpotently; otherwise a
    ``PrecisionError`` is raised after ``max_terms`` terms.
    """
    t = as_fmpq(t)
    chart = a.chart
    raising = _raises_degree(field, chart)
    cap = max_terms if max_terms is not None else (a.order + 2 if raising else 4 * (a.order + 2))
    out = a
    term = a
    for j in range(1, cap + 1):
        term = apply_field(field, term).scale(t / j)
        if term.is_zero() or term.order < 0:
            break
        if term.valuation() > out.order:
            break
        out = out + term
    else:
        if not raising:
            raise PrecisionError("Lie series did not terminate; field is not nilpotent")
    return out


def iterated_fh(f, h, i):
    """``{f, h}_i = Z_f^{i+1}(h)``.

    Raises
    ------
    OrderExhausted
        If the result would carry no information at the origin.
    """
    Z = hamiltonian_field(f)
    out = h
    for _ in range(i + 1):
        out = apply_field(Z, out)
        if out.order < 0:
            raise OrderExhausted(h.order, f"order {h.order} exhausted before {i + 1} brackets")
    return out


def iterated_hf(h, f, i):
    """``{h, f}_i = Z_h^{i+1}(f)``."""
    return iterated_fh(h, f, i)


def first_nonvanishing(f, h, start=0, stop=None):
    """Smallest ``i >= start`` with ``{f,h}_i(0) != 0``.

    Returns ``(i, value)`` or ``(Undetermined(order), None)``.
    Evaluates by repeated application of ``Z_f`` (each step reuses the
    previous bracket).
    """
    Z = hamiltonian_field(f)
    cur = h
    i = -1
    while True:
        i += 1
        if stop is not None and i > stop:
            return Undetermined(h.order), None
        cur = apply_field(Z, cur)
        if cur.order < 0:
            return Undetermined(h.order), None
        if i >= start:
            v = cur.eval0()
            if v != 0:
                return i, v


# -- flow oracle -------------------------------------------------------------------

def _tctx():
    return flint.fmpq_mpoly_ctx.get(("t",), "lex")


def _trunc_t(poly, M):
    """Drop powers of t above M from a polynomial in t."""
    if poly.is_zero() or poly.total_degree() <= M:
        return poly
    ctx = poly.context()
    return ctx.from_dict({e: c for e, c in poly.terms() if e[0] <= M})


def _on_curve(jet, curve, M):
    p = jet.poly()
    if p.is_zero():
        return _tctx().from_dict({})
    return _trunc_t(p.compose(*curve, ctx=_tctx()), M)


def flow_tangency_oracle(generator, target, maxorder):
    """Tangency index of ``Z_generator`` with ``{target = 0}`` via the flow.

    Builds the formal curve ``gamma(t) = exp(t Z)(0)`` by Picard
    iteration of ``gamma' = Z(gamma)`` on truncated power series in ``t``
    and expands ``target(gamma(t))``.  Its order of vanishing minus one
    is returned.

    Parameters
    ----------
    generator, target : Jet
        On the same chart.
    maxorder : int
        Largest index to look for.

    Returns
    -------
    int or Undetermined
    """
    generator._check(target)
    Z = hamiltonian_field(generator)
    M = maxorder + 1
    M = min(M, target.order, min(c.order for c in Z) + 1)
    if M < 1:
        return Undetermined(maxorder)
    tctx = _tctx()
    (t,) = tctx.gens()
    curve = [tctx.from_dict({}) for _ in Z]
    # M sweeps of gamma <- int_0^t Z(gamma) make gamma exact mod t^(M+1)
    for _ in range(M):
        curve = [_on_curve(c, curve, M - 1).integral(0) for c in Z]
    series = _on_curve(target, curve, M)
    low = min((e[0] for e, c in series.terms() if c != 0), default=None)
    if low is None or low > M:
        return Undetermined(M - 1)
    return low - 1


def taylor_coefficients_along_flow(generator, target, M):
    """Coefficients ``c_m`` of ``target(gamma(t)) = sum c_m t^m`` for m <= M."""
    Z = hamiltonian_field(generator)
    tctx = _tctx()
    curve = [tctx.from_dict({}) for _ in Z]
    for _ in range(M):
        curve = [_on_curve(c, curve, M - 1).integral(0) for c in Z]
    series = _on_curve(target, curve, M)
    d = {e[0]: c for e, c in series.terms()}
    return [d.get(m, flint.fmpq(0)) for m in range(M + 1)]


def bracket_series_coefficients(generator, target, M):
    """``Z^m(target)(0) / m!`` for m <= M, by nested brackets (cross-check)."""
    Z = hamiltonian_field(generator)
    out = []
    cur = target
    for m in range(M + 1):
        if m:
            cur = apply_field(Z, cur)
        out.append(as_fmpq(cur.eval0()) / factorial(m))
    return out
