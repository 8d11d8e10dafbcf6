"""Decision procedure for the singularity class of a section ``{h = 0}``.

The energy is fixed to ``f = y``.  Classes, from most to least generic:

* ``Nonsingular``   -- ``{f,h}(0) != 0``
* ``S(k)``          -- first nonzero ``{f,h}_i(0)`` at ``i = k`` and
  ``df^dh(0) != 0``
* ``S(k,l)``        -- additionally ``l = min{i >= 1 : {h,f}_i(0) != 0}``
* ``A1``            -- ``df^dh(0) = 0``, Morse restriction to ``{y = 0}``
  and ``{f,{f,h}}(0), {h,{h,f}}(0)`` both nonzero
* ``Degenerate``    -- anything else that was fully decided
* ``UndeterminedAtOrder(N)`` -- the jet order ran out first
"""

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ChartMismatch, InvalidSection, PrecisionError, Undetermined
from .jets import Chart, Jet
from .linalg import determinant
from .poisson import apply_field, bracket, first_nonvanishing, hamiltonian_field, iterated_fh

__all__ = [
    "SingularityClass", "classify_section", "hessian_restricted", "is_morse",
    "check_normal_form_conditions", "typical", "assemble_prepared",
]


@dataclass(frozen=True)
class SingularityClass:
    """Result of :func:`classify_section`.

    Attributes
    ----------
    tag : str
        One of ``Nonsingular``, ``S``, ``A1``, ``Degenerate``,
        ``Undetermined``.
    k, l : int or None
        Tangency indices for the ``S`` family (``l`` is None for a bare
        ``S(k)``).
    witnesses : tuple of (str, Fraction)
        Every predicate evaluated at 0, in evaluation order.
    typical : bool
    order : int
        Jet order the decision was made at.
    """

    tag: str
    k: int = None
    l: int = None
    witnesses: tuple = field(default=(), compare=False)
    typical: bool = False
    order: int = 0
    n: int = 1

    @property
    def name(self):
        if self.tag == "S":
            return f"S({self.k})" if self.l is None else f"S({self.k},{self.l})"
        if self.tag == "Undetermined":
            return str(Undetermined(self.order))
        return self.tag

    def __str__(self):
        return self.name

    @property
    def determined(self):
        return self.tag != "Undetermined"

    def to_json(self):
        from .report import rat
        return {
            "class": self.name,
            "k": self.k,
            "l": self.l,
            "typical": self.typical,
            "order": self.order,
            "witnesses": [{"condition": c, "value": rat(v)} for c, v in self.witnesses],
        }


def typical(k, l=None, n=1):
    """Typicality range: ``1 <= k <= 2n+1``; with ``l``, ``1 <= k+l-1 <= 2n+1``."""
    if l is None:
        return 1 <= k <= 2 * n + 1
    return 1 <= k + l - 1 <= 2 * n + 1


def _y(chart, order):
    return Jet.var(chart, "y", order)


def hessian_restricted(h):
    """Hessian of ``h(x, 0, p, q)`` at 0, in the variables (x, p, q).

    Raises
    ------
    InvalidSection
        If the restricted differential does not vanish at 0.
    PrecisionError
        If ``h`` has order below 2.
    """
    ch = h.chart
    if ch.kind != "full":
        raise ChartMismatch("hessian_restricted expects the full chart")
    if h.order < 2:
        raise PrecisionError("Hessian needs order >= 2")
    r = h.subs_zero("y")
    names = [v for v in ch.names if v != "y"]
    if any(r.partial(v).eval0() != 0 for v in names):
        raise InvalidSection("restriction to {y=0} has nonzero differential at 0")
    return [[r.partial(a).partial(b).eval0() for b in names] for a in names]


def is_morse(H):
    """Nondegeneracy of a symmetric matrix (determinant test)."""
    return determinant(H) != 0


def classify_section(h, n=None, maxorder=None):
    """Classify the section ``{h = 0}`` of ``(dx^dy + dp^dq, f = y)``.

    Parameters
    ----------
    h : Jet
        On a full chart, standard weights.
    n : int, optional
        Checked against the chart.
    maxorder : int, optional
        Largest bracket index to try; defaults to what the jet order allows.

    Returns
    -------
    SingularityClass

    Raises
    ------
    InvalidSection
        ``h(0) != 0`` or ``dh(0) = 0``.

    Examples
    --------
    >>> from hamsec.parsing import parse_polynomial
    >>> from hamsec.jets import Chart
    >>> str(classify_section(parse_polynomial("x^2 + y + p1", Chart.full(1), 6)))
    'S(1,1)'
    """
    ch = h.chart
    if ch.kind != "full" or not ch.standard:
        raise ChartMismatch("sections live on the standard full chart")
    if n is not None and n != ch.n:
        raise ChartMismatch(f"n={n} but chart has n={ch.n}")
    if ch.n < 1:
        raise ChartMismatch("n >= 1 is required")
    N = h.order
    if N < 1:
        raise PrecisionError("need at least a 1-jet")
    if h.eval0() != 0:
        raise InvalidSection("h(0) != 0: the hypersurface does not pass through 0")
    grad = h.gradient0()
    if all(g == 0 for g in grad):
        raise InvalidSection("dh(0) = 0: not a smooth hypersurface germ")
    n = ch.n
    stop = None if maxorder is None else maxorder
    wit = []
    f = _y(ch, N)

    def undetermined(k=None):
        return SingularityClass("Undetermined", k=k, witnesses=tuple(wit), order=N, n=n)

    fh0 = grad[ch.index["x"]]
    wit.append(("{f,h}(0)", fh0))
    if fh0 != 0:
        return SingularityClass("Nonsingular", witnesses=tuple(wit), typical=True, order=N, n=n)

    k, val = first_nonvanishing(f, h, start=1, stop=stop)
    if isinstance(k, Undetermined):
        wit.append(("{f,h}_i(0) = 0 for all available i", Fraction(0)))
        return undetermined()
    wit.append((f"{{f,h}}_{k}(0)", val))

    transversal = any(g != 0 for i, g in enumerate(grad) if ch.names[i] != "y")
    wit.append(("df^dh(0) != 0", Fraction(int(transversal))))
    if transversal:
        l, lval = first_nonvanishing(h, f, start=1, stop=stop)
        if isinstance(l, Undetermined):
            return undetermined(k)
        wit.append((f"{{h,f}}_{l}(0)", lval))
        return SingularityClass("S", k=k, l=l, witnesses=tuple(wit),
                                typical=typical(k, l, n), order=N, n=n)

    # df^dh(0) = 0: A1 test through the restriction to X0 = {y = 0}
    H = hessian_restricted(h)
    det = determinant(H)
    wit.append(("det d2(h|X0)(0)", Fraction(int(det.p), int(det.q))))
    ffh = iterated_fh(f, h, 1).eval0()
    wit.append(("{f,{f,h}}(0)", ffh))
    try:
        hhf = bracket(h, bracket(h, f)).eval0()
    except PrecisionError:
        return undetermined(k)
    wit.append(("{h,{h,f}}(0)", hhf))
    if det != 0 and ffh != 0 and hhf != 0:
        return SingularityClass("A1", k=1, witnesses=tuple(wit), typical=True, order=N, n=n)
    return SingularityClass("Degenerate", k=k, witnesses=tuple(wit), typical=False, order=N, n=n)


def assemble_prepared(R, k, order=None):
    """``x^(k+1) + sum_i R_i x^i`` on the full chart, from orbit-chart ``R_i``."""
    orbit = R[0].chart
    full = Chart.full(orbit.n)
    N = min(r.order for r in R) if order is None else order
    x = Jet.var(full, "x", N)
    out = x ** (k + 1)
    for i, r in enumerate(R):
        lifted = r.to_chart(full, N)
        out = out + (lifted * x ** i if i else lifted)
    return out.truncate(N)


def check_normal_form_conditions(R, k, l=None):
    """Evaluate the preliminary-normal-form conditions on ``R_0..R_{k-1}``.

    Returns a dict with one boolean (plus value) per condition, the ``l``
    implied by the ``R``, and the cross-check of the bracket identities
    against the classifier run on the assembled section.
    """
    if len(R) != k:
        raise ValueError(f"expected {k} coefficients, got {len(R)}")
    R0 = R[0]
    ch = R0.chart
    if ch.kind != "orbit":
        raise ChartMismatch("R lives on the orbit chart")
    report = {"k": k, "conditions": {}, "failures": []}
    conds = report["conditions"]
    conds["R_i(0) = 0"] = all(r.eval0() == 0 for r in R)
    g = R0.gradient0()
    conds["dy^dR0(0) != 0"] = any(v != 0 for i, v in enumerate(g) if ch.names[i] != "y")
    dyR0 = R0.partial("y")
    implied_l = None
    values = {}
    if k == 1:
        v = dyR0.eval0()
        values["dR0/dy(0)"] = v
        if v != 0:
            implied_l = 1
        else:
            cur = dyR0
            Z = hamiltonian_field(R0)
            i = 0
            while True:
                cur = apply_field(Z, cur)
                if cur.order < 0:
                    break
                val = cur.eval0()
                values[f"{{R0,dR0/dy}}_{i}(0)"] = val
                if val != 0:
                    implied_l = i + 2
                    break
                i += 1
    else:
        Z = hamiltonian_field(R0)
        cur = R[1]
        i = 0
        while True:
            cur = apply_field(Z, cur)
            if cur.order < 0:
                break
            val = cur.eval0()
            values[f"{{R0,R1}}_{i}(0)"] = val
            if val != 0:
                implied_l = i + 1
                break
            i += 1
    report["values"] = values
    report["l"] = implied_l
    if l is not None:
        conds[f"l = {l}"] = implied_l == l
    # cross-check against the classifier on the assembled section
    h = assemble_prepared(R, k)
    cls = classify_section(h.to_chart(Chart.full(ch.n), h.order))
    report["classified"] = cls.name
    conds["classifier agrees"] = cls.tag == "S" and cls.k == k and (implied_l is None or cls.l == implied_l)
    report["failures"] = [name for name, ok in conds.items() if not ok]
    report["ok"] = not report["failures"]
    return report
