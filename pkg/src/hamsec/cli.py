"""Command line surface: ``hamsec <command> [flags] [polynomial]``.

Commands print one JSON document (``--json``) or a flat ``key: value``
rendering of the same document.  Exit codes::

    0  ok
    1  input error (syntax, unknown variable, not a section, wrong class)
    2  undetermined at the given jet order
    3  genericity failure (outside the open set of a template)
    4  internal consistency abort
"""

import argparse
import os
import sys

from . import report
from .classify import classify_section
from .errors import (ChartMismatch, ClassMismatch, ConsistencyError, GenericityError, HamsecError,
                     InvalidSection, PrecisionError, Undetermined)
from .jets import Chart, Jet
from .moduli import assemble_moduli, validate_template
from .normalize import reduce_to_preliminary, verify_preliminary, weierstrass_prepare
from .parsing import ParseError, parse_map, parse_polynomial
from .poisson import first_nonvanishing, flow_tangency_oracle
from .suite import run_invariance
from .whitney import MapJet, reduce_R_omega, whitney_classify

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED, EXIT_GENERICITY, EXIT_CONSISTENCY = range(5)

COMMANDS = ("classify", "prepare", "reduce", "whitney", "moduli", "verify", "oracle")


class Undecided(HamsecError):
    """Raised inside the CLI to map an ``Undetermined`` outcome to exit code 2."""

    def __init__(self, message, payload):
        super().__init__(message)
        self.payload = payload


class _VerifyFailed(ConsistencyError):
    def __init__(self, payload):
        super().__init__(f"{len(payload['failures'])} invariance failures")
        self.payload = payload


def build_parser():
    p = argparse.ArgumentParser(prog="hamsec", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("expr", nargs="?", help="polynomial (or '; '-separated map components)")
    p.add_argument("--n", type=int, default=1, help="number of (p, q) pairs (default: 1)")
    p.add_argument("--order", type=int, default=None, help="jet order N (default: 2n + 4)")
    p.add_argument("--seed", type=int, default=0, help="seed for random runs (default: 0)")
    p.add_argument("--json", action="store_true", help="print JSON instead of key: value lines")
    p.add_argument("--input", default=None, help="file holding the input, or the input itself")
    p.add_argument("--trials", type=int, default=20, help="trials for verify (default: 20)")
    p.add_argument("--k", type=int, default=None, help="force k for prepare/reduce")
    return p


def _read_input(args):
    text = args.expr
    if args.input is not None:
        if os.path.isfile(args.input):
            with open(args.input, encoding="utf-8") as fh:
                text = fh.read()
        else:
            text = args.input
    if text is None or not text.strip():
        raise ParseError("no input given", "", 0)
    return text.strip()


def config_of(args):
    return {"n": args.n, "order": args.order, "seed": args.seed}


# -- commands --------------------------------------------------------------------

def cmd_classify(args, text):
    h = parse_polynomial(text, Chart.full(args.n), args.order)
    cls = classify_section(h)
    out = cls.to_json()
    if not cls.determined:
        raise Undecided(f"class undetermined at order {cls.order}", out)
    return out


def _k_of(args, h):
    if args.k is not None:
        return args.k
    cls = classify_section(h)
    if cls.k is None:
        raise Undecided(f"k undetermined at order {cls.order}", cls.to_json())
    return cls.k


def cmd_prepare(args, text):
    h = parse_polynomial(text, Chart.full(args.n), args.order)
    k = _k_of(args, h)
    unit, R = weierstrass_prepare(h, k)
    return {"k": k, "unit": report.jet_json(unit), "R": [report.jet_json(r) for r in R]}


def cmd_reduce(args, text):
    h = parse_polynomial(text, Chart.full(args.n), args.order)
    nf = reduce_to_preliminary(h, k=args.k)
    out = nf.to_json()
    out["checks"] = verify_preliminary(h, nf)
    return out


def cmd_whitney(args, text):
    r = MapJet(parse_map(text, Chart.reduced(args.n), args.order))
    wc = whitney_classify(r)
    out = {"class": wc.to_json()}
    if not wc.determined:
        raise Undecided(f"tangency index undetermined at order {wc.order}", out)
    if wc.whitney:
        mod, phi = reduce_R_omega(r)
        out["moduli"] = mod.to_json()
        out["diffeo"] = {v: report.jet_json(c) for v, c in zip(phi.target.names, phi)}
    return out


def cmd_moduli(args, text):
    h = parse_polynomial(text, Chart.full(args.n), args.order)
    m = assemble_moduli(h)
    out = m.to_json()
    out["validation"] = validate_template(m)
    return out


def cmd_oracle(args, text):
    h = parse_polynomial(text, Chart.full(args.n), args.order)
    y = Jet.var(h.chart, "y", h.order)
    rows = []
    for label, gen, tgt in (("k", y, h), ("l", h, y)):
        flow = flow_tangency_oracle(gen, tgt, h.order)
        brk, val = first_nonvanishing(gen, tgt, start=0)
        rows.append({
            "index": label,
            "flow": str(flow) if isinstance(flow, Undetermined) else flow,
            "brackets": str(brk) if isinstance(brk, Undetermined) else brk,
            "value": report.rat(val),
            "agree": flow == brk,
        })
    out = {"table": rows}
    if not all(r["agree"] for r in rows):
        raise ConsistencyError("flow and bracket oracles disagree: " + report.dumps(out))
    return out


def cmd_verify(args, _text=None):
    N = args.order
    results = run_invariance(args.n, N, args.trials, args.seed)
    fails = [r.to_json() for r in results if not r.ok]
    out = {
        "trials": len(results),
        "passed": len(results) - len(fails),
        "failures": fails,
        "seeds": {"base": args.seed, "trial_seed": "'<base>:<index>'"},
        "per_class": {},
    }
    for r in results:
        row = out["per_class"].setdefault(r.cls, {"trials": 0, "passed": 0})
        row["trials"] += 1
        row["passed"] += int(r.ok)
    if fails:
        raise _VerifyFailed(out)
    return out


HANDLERS = {
    "classify": cmd_classify, "prepare": cmd_prepare, "reduce": cmd_reduce,
    "whitney": cmd_whitney, "moduli": cmd_moduli, "oracle": cmd_oracle, "verify": cmd_verify,
}


# -- rendering ---------------------------------------------------------------------------

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        if set(obj) >= {"text", "order", "terms"}:
            yield prefix, f"{obj['text']}  (order {obj['order']})"
            return
        for key in sorted(obj):
            yield from _flatten(obj[key], f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(obj, list) and obj and all(isinstance(x, (dict, list)) for x in obj):
        for i, x in enumerate(obj):
            yield from _flatten(x, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(doc, as_json):
    if as_json:
        return report.dumps(doc)
    return "\n".join(f"{k}: {v}" for k, v in _flatten(doc))


def main(argv=None):
    args = build_parser().parse_intermixed_args(argv)
    if args.n < 1:
        print("error: --n must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    if args.order is None:
        args.order = 2 * args.n + 4
    elif args.order < 2 * args.n + 4:
        print(f"warning: order {args.order} < 2n + 4 = {2 * args.n + 4}; "
              "high tangency indices may be undetermined", file=sys.stderr)
    status, payload, error = EXIT_OK, None, None
    try:
        text = None if args.command == "verify" else _read_input(args)
        payload = HANDLERS[args.command](args, text)
    except Undecided as exc:
        status, payload, error = EXIT_UNDETERMINED, exc.payload, str(exc)
    except _VerifyFailed as exc:
        status, payload, error = EXIT_CONSISTENCY, exc.payload, str(exc)
    except GenericityError as exc:
        status, error = EXIT_GENERICITY, str(exc)
        payload = {"genericity_failure": exc.witness}
    except ConsistencyError as exc:
        status, error = EXIT_CONSISTENCY, str(exc)
    except PrecisionError as exc:
        status, error = EXIT_UNDETERMINED, str(exc)
    except (ParseError, InvalidSection, ChartMismatch, ClassMismatch, ValueError) as exc:
        status, error = EXIT_INPUT, str(exc)
    doc = report.document(args.command, payload, config_of(args))
    if error is not None:
        doc["error"] = error
    doc["exit_code"] = status
    print(render(doc, args.json))
    return status


if __name__ == "__main__":
    sys.exit(main())
