import json
import subprocess
import sys

import pytest

from fuchsmono.cli import EXIT_ERROR, EXIT_FAIL, EXIT_OK, jsonable, parse_number, run
from fractions import Fraction


def out(argv):
    code, text = run(argv)
    return code, json.loads(text)


def test_parse_number():
    assert parse_number("1/3") == Fraction(1, 3)
    assert parse_number("0.2+1.1i") == 0.2 + 1.1j
    assert parse_number([1.0, -2.0]) == 1 - 2j


def test_jsonable():
    assert jsonable({"a": 1 + 2j, "b": Fraction(3, 4), "c": None}) == {"a": [1.0, 2.0], "b": "3/4", "c": None}


def test_lattice_ok():
    code, doc = out(["lattice", "--tau", "0.2+1.1i", "--points", "20"])
    assert code == EXIT_OK and doc["pass"]
    assert any(r["name"].startswith("legendre") for r in doc["results"])


def test_build_exact():
    code, doc = out(["build", "--theta", "1,1,1,4", "--lam", "2", "--mu", "1/3", "--k", "1", "--t", "3"])
    assert code == EXIT_OK
    assert doc["data"]["system"]["Ainf"] == [["1/2", 0], [0, "-7/2"]]


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_midconv_seeds(seed):
    code, doc = out(["midconv", "--seed", str(seed)])
    assert code == EXIT_OK, doc["results"]


def test_integral_kernels():
    for kernel in ("alpha", "g-alpha", "kappa-tilde", "omega-shift"):
        code, doc = out(["integral", "--kernel", kernel, "--i", "1", "--tau", "1.3i"])
        assert code == EXIT_OK, (kernel, doc["results"])


def test_failing_check_exit_code():
    code, doc = out(["integral", "--order", "8", "--tol", "1e-15"])
    assert code == EXIT_FAIL and doc["pass"] is False


def test_heun_fuchs_violation():
    code, doc = out(["monodromy", "--heun", "1,1,1,1,2,0,3", "--mode", "numeric"])
    assert code == EXIT_ERROR
    assert doc["error"]["code"] == "PARAM_FUCHS"


def test_domain_errors():
    code, doc = out(["integral", "--order", "4"])
    assert code == EXIT_ERROR and doc["error"]["type"] == "DomainError"
    code, doc = out(["monodromy", "--tau", "1.3i"])
    assert code == EXIT_ERROR


def test_closed_mode():
    code, doc = out(["monodromy", "--kappa-tilde", "0.3", "--mode", "closed"])
    assert code == EXIT_OK
    assert set(doc["data"]["closed"]) == {"g0", "g1", "g2", "g3"}


def test_heun_numeric():
    code, doc = out(["monodromy", "--heun", "1,1,1,1.5,0.5,0.2,3", "--mode", "numeric"])
    assert code == EXIT_OK
    assert set(doc["data"]["numeric"]) == {"0", "1", "t", "inf"}


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 5, "tol": 1e-3, "points": 7}))
    _, doc = out(["lattice", "--config", str(cfg), "--tol", "1e-6"])
    assert doc["config"]["seed"] == 5
    assert doc["config"]["tol"] == 1e-6          # flag beats file
    assert doc["config"]["points"] == 7


def test_missing_config_file(tmp_path):
    code, doc = out(["lattice", "--config", str(tmp_path / "nope.json")])
    assert code == EXIT_ERROR and doc["error"]["code"] == "INPUT"


def test_picard_csv():
    code, text = run(["picard", "--n", "2", "--format", "csv"])
    assert code == EXIT_OK
    lines = text.strip().splitlines()
    assert lines[0].startswith("tau_re,tau_im,t_re") and len(lines) == 3


def test_csv_results_table():
    code, text = run(["lattice", "--format", "csv", "--points", "5"])
    assert text.splitlines()[0] == "name,value_re,value_im,error_estimate,tolerance,pass"


def test_determinism():
    argv = ["density", "--seed", "3", "--points", "4", "--tau", "0.2+1.1i"]
    assert run(argv)[1] == run(argv)[1]


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "fuchsmono", "build", "--seed", "4"],
                       capture_output=True, text=True, timeout=120)
    assert p.returncode == 0
    assert json.loads(p.stdout)["command"] == "build"
