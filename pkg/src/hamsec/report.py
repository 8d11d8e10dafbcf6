"""JSON rendering of jets, classes and moduli.

Rationals are written as ``"num/den"`` strings (``"3"`` when the
denominator is 1) so reports stay exact and compare byte for byte.
Every top-level document carries ``"schema": "hamsec/1"``.
"""

import json
from fractions import Fraction

import flint

from .jets import to_fraction

SCHEMA = "hamsec/1"

__all__ = ["SCHEMA", "rat", "jet_json", "document", "dumps"]


def rat(v):
    """Exact string for a rational (``None`` passes through)."""
    if v is None:
        return None
    if isinstance(v, bool):
        return str(int(v))
    f = v if isinstance(v, Fraction) else to_fraction(v)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def jet_json(j):
    """``{"chart", "order", "text", "terms"}`` with terms sorted by exponent.

    >>> from hamsec.jets import Chart, Jet
    >>> y = Jet.var(Chart.orbit(1), "y", 2)
    >>> jet_json(y * 3 / 2)["terms"]
    [[[1, 0, 0], '3/2']]
    """
    if j is None:
        return None
    terms = [[[int(x) for x in e], rat(c)] for e, c in sorted(j.terms()) if c != 0]
    return {
        "chart": list(j.chart.names),
        "order": j.order,
        "text": j.to_str(),
        "terms": terms,
    }


def document(command, payload, config=None):
    out = {"schema": SCHEMA, "command": command}
    if config:
        out["config"] = config
    out["result"] = payload
    return out


def _plain(o):
    # flint scalars that slip through payloads
    if isinstance(o, flint.fmpz):
        return int(o)
    if isinstance(o, (flint.fmpq, Fraction)):
        return rat(o)
    raise TypeError(f"{type(o).__name__} is not JSON serializable")


def dumps(doc):
    """Deterministic serialization (sorted keys, fixed separators)."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=True, default=_plain)
