import json
import random
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from hamsec import cli, report
from hamsec.forms import pullback, standard_symplectic
from hamsec.generators import (random_isotropy_symplectomorphism, random_reduced_symplectomorphism,
                               random_unit)
from hamsec.jets import Chart, DiffeoJet, Jet
from hamsec.parsing import ParseError, parse_map, parse_polynomial
from hamsec.poisson import hamiltonian_field, lie_series
from hamsec.suite import run_invariance, trial_rng

seeds = st.integers(0, 2**63 - 1)
FULL1 = Chart.full(1)


# -- parsing ------------------------------------------------------------------------

def test_parse_examples():
    h = parse_polynomial("x^2 + y + p1", FULL1, 4)
    x, y, p, q = Jet.coords(FULL1, 4)
    assert h == x * x + y + p
    assert parse_polynomial("0", FULL1, 4).is_zero()
    assert parse_polynomial("3/2*q1*p2 - q1^3", Chart.full(2), 4).nterms() == 2


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as exc:
        parse_polynomial("x^2 + z", FULL1, 4)
    assert "z" in str(exc.value) and exc.value.column == 7
    with pytest.raises(ParseError):
        parse_polynomial("x^2 +", FULL1, 4)
    with pytest.raises(ParseError):
        parse_polynomial("x +\n (y", FULL1, 4)


def test_parse_map():
    r = parse_map("p1; q1^2 + p2; p2; q2", Chart.reduced(2), 4)
    assert [str(c) for c in r] == ["p1", "q1^2 + p2", "p2", "q2"]


# -- random symplectomorphisms ----------------------------------------------------------

def test_zero_hamiltonian_flow_is_identity():
    Z = hamiltonian_field(Jet.zero(FULL1, 5))
    assert [lie_series(Z, c) for c in Jet.coords(FULL1, 5)] == list(Jet.coords(FULL1, 5))


def test_flow_of_y_p1():
    # Z_{y p1} = p1 d/dx - y d/dq1
    G = parse_polynomial("y*p1", FULL1, 6)
    Z = hamiltonian_field(G)
    comps = [lie_series(Z, c) for c in Jet.coords(FULL1, 5)]
    assert [str(c) for c in comps] == ["x + p1", "y", "p1", "-y + q1"]
    phi = DiffeoJet(comps)
    om = standard_symplectic(FULL1, 5)
    assert pullback(phi, om).truncate(4) == om.truncate(4)


@given(seeds, st.sampled_from([1, 2]))
@settings(max_examples=8)
def test_random_isotropy_draws(seed, n):
    N = 5
    phi = random_isotropy_symplectomorphism(n, N, random.Random(seed))
    full = phi.source
    om = standard_symplectic(full, N + 1)
    assert pullback(phi, om).truncate(N - 1) == om.truncate(N - 1)
    assert phi["y"].truncate(N) == Jet.var(full, "y", N)
    assert all(c.eval0() == 0 for c in phi)


@given(seeds)
@settings(max_examples=8)
def test_random_reduced_and_units(seed):
    rng = random.Random(seed)
    phi = random_reduced_symplectomorphism(2, 5, rng)
    om = standard_symplectic(phi.source, 6)
    assert pullback(phi, om).truncate(4) == om.truncate(4)
    assert random_unit(FULL1, 4, rng).eval0() != 0


def test_same_seed_same_draw():
    a = random_isotropy_symplectomorphism(2, 5, random.Random(3))
    b = random_isotropy_symplectomorphism(2, 5, random.Random(3))
    assert list(a) == list(b)
    assert trial_rng(7, 2).random() == trial_rng(7, 2).random() != trial_rng(7, 3).random()


# -- report -------------------------------------------------------------------------

def test_rationals_as_strings():
    from fractions import Fraction
    assert report.rat(Fraction(-3, 4)) == "-3/4" and report.rat(2) == "2"
    doc = report.document("x", {"b": 1, "a": 2})
    assert report.dumps(doc).index('"a"') < report.dumps(doc).index('"b"')
    assert doc["schema"] == "hamsec/1"


# -- CLI ------------------------------------------------------------------------------

def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_cli_classify_melrose(capsys):
    code, out = run(capsys, "classify", "--n", "1", "--json", "x^2+y+p1")
    doc = json.loads(out)
    assert code == 0 and doc["result"]["class"] == "S(1,1)"
    wit = {w["condition"]: w["value"] for w in doc["result"]["witnesses"]}
    assert wit["{f,h}_1(0)"] == "2" and wit["{h,f}_1(0)"] == "-2"


def test_cli_oracle_cusp(capsys):
    code, out = run(capsys, "oracle", "--n", "1", "--json", "x^3+q1*x+p1")
    rows = json.loads(out)["result"]["table"]
    assert code == 0
    assert rows[0]["index"] == "k" and rows[0]["flow"] == rows[0]["brackets"] == 2
    assert all(r["agree"] for r in rows)


def test_cli_exit_codes(capsys, tmp_path):
    assert run(capsys, "classify", "x^2+z")[0] == cli.EXIT_INPUT
    assert run(capsys, "classify", "--order", "4", "x^7+p1")[0] == cli.EXIT_UNDETERMINED
    assert run(capsys, "moduli", "x^2+y+p1")[0] == cli.EXIT_GENERICITY
    f = tmp_path / "h.txt"
    f.write_text("x^2 + y + p1 + y*q1\n", encoding="utf-8")
    code, out = run(capsys, "moduli", "--input", str(f))
    assert code == 0 and "validation.ok: True" in out


def test_cli_reduce_prepare_whitney(capsys):
    code, out = run(capsys, "prepare", "--json", "x^3+x^2+x*y+y")
    assert code == 0 and json.loads(out)["result"]["k"] == 1
    code, out = run(capsys, "reduce", "--json", "x^2+2*x*y+y+p1")
    assert code == 0 and all(json.loads(out)["result"]["checks"].values())
    code, out = run(capsys, "whitney", "--n", "2", "--json", "p1; q1^2+p2; p2; q2")
    res = json.loads(out)["result"]
    assert code == 0 and res["class"]["s"] == 1 and res["moduli"]["r1j_independent"]


def test_cli_deterministic_bytes():
    cmd = [sys.executable, "-m", "hamsec.cli", "verify", "--n", "1", "--order", "7",
           "--trials", "3", "--seed", "11", "--json"]
    a = subprocess.run(cmd, capture_output=True, check=False)
    b = subprocess.run(cmd, capture_output=True, check=False)
    assert a.returncode == 0 and a.stdout == b.stdout
    doc = json.loads(a.stdout)
    assert doc["result"]["passed"] == 3


def test_run_invariance_small():
    res = run_invariance(1, 7, 3, seed=5)
    assert [r.index for r in res] == [0, 1, 2] and all(r.ok for r in res)
