import json
import subprocess
import sys
from importlib import resources

import jsonschema
import pytest

from unitary_spherical import padic_cartan as pc

SCHEMA = json.loads(resources.files("unitary_spherical").joinpath("schema/report.schema.json").read_text())


def cli(*args, env=None):
    return subprocess.run([sys.executable, "-m", "unitary_spherical", *map(str, args)],
                          capture_output=True, text=True, timeout=110, env=env)


def cli_json(*args):
    res = cli(*args, "--json")
    report = json.loads(res.stdout)
    jsonschema.validate(report, SCHEMA)
    return res.returncode, report


def write_matrix(tmp_path, x, name="x.json"):
    path = tmp_path / name
    path.write_text(json.dumps(pc.matrix_to_json(x)))
    return path


def test_hl_trivial():
    res = cli("hl", "--n", 1, "--m", 2, "--mu", 0)
    assert res.returncode == 0 and res.stdout.strip() == "P = 1"


def test_hl_json_sorted_terms():
    code, rep = cli_json("hl", "--n", 2, "--m", 4, "--mu", "1,0")
    assert code == 0 and rep["ok"]
    xs = [t["x"] for t in rep["result"]["P"]["terms"]]
    assert xs == sorted(xs) and len(xs) == 4


def test_hl_bad_mu():
    res = cli("hl", "--m", 4, "--mu", "0,1")
    assert res.returncode == 2 and "decreasing" in res.stderr


def test_omega_and_psi():
    res = cli("omega", "--m", 2, "--e", 0, "--lambda", 0)
    assert res.returncode == 0 and "omega = 1" in res.stdout
    assert "closed form agrees: yes" in res.stdout
    res = cli("psi", "--m", 3, "--e", 1, "--lambda", -1)
    assert res.returncode == 0 and res.stdout.strip() == "1"
    code, rep = cli_json("psi", "--m", 2, "--lambda", 1)
    assert code == 0 and rep["result"]["lambda"] == [1]


def test_odd_m_large_e_rejected():
    res = cli("omega", "--m", 3, "--e", 2, "--lambda", 0)
    assert res.returncode == 2 and "e <= 1" in res.stderr


def test_cartan_examples(tmp_path):
    F = pc.QuadField(2)
    res = cli("cartan", write_matrix(tmp_path, pc.make_x_lambda((-1,), 3, F)))
    assert res.returncode == 0
    assert res.stdout.splitlines() == ["lambda = (-1)", "parity = 1", "jtype = true", "r = 1"]
    code, rep = cli_json("cartan", write_matrix(tmp_path, pc.identity(pc.QuadField(3), 3), "id.json"))
    assert code == 0 and rep["result"]["lambda"] == [0]
    assert rep["result"]["invariants"]["jtype"] is False


def test_cartan_non_hermitian(tmp_path):
    F = pc.QuadField(3)
    x = pc.make_x_lambda((1,), 3, F)
    x[0][1] = F.one
    res = cli("cartan", write_matrix(tmp_path, x))
    assert res.returncode == 2 and "not hermitian at precision" in res.stderr


def test_cartan_precision_exhausted(tmp_path):
    F = pc.QuadField(3, 3)
    x = pc.act(pc.KSampler(F, seed=1, digits=3).element(3), pc.make_x_lambda((3,), 3, F))
    res = cli("cartan", write_matrix(tmp_path, x))
    assert res.returncode == 3 and "precision" in res.stderr


def test_cartan_bad_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"p": 3, "N": 5, "m": 3, "entries": [[]]}')
    assert cli("cartan", path).returncode == 2


@pytest.mark.parametrize("args", [
    ("oracle", "--prime", 3, "--lambda", 1, "--s", 1),
    ("feq", "--m", 4, "--e", 1, "--samples", 20, "--seed", 7),
    ("cartan", "--m", 3, "--e", 1, "--trials", 50, "--seed", 7),
    ("rank", "--m", 4, "--samples", 5),
    ("plancherel", "--m", 3, "--e", 1),
    ("inversion", "--m", 3),
])
def test_verify_suites_pass(args):
    code, rep = cli_json("verify", *args)
    assert code == 0 and rep["ok"] and rep["checks"]
    assert all(c["pass"] for c in rep["checks"])
    assert rep["seed"] == (7 if "--seed" in args else 0)


def test_verify_text_report_prints_seed():
    res = cli("verify", "oracle", "--prime", 3, "--lambda", 1, "--s", 1)
    lines = res.stdout.splitlines()
    assert res.returncode == 0 and "seed: 0" in lines and lines[-1] == "PASS"


def test_verify_failure_exit_code():
    code, rep = cli_json("verify", "inversion", "--m", 3, "--literal")
    assert code == 1 and rep["ok"] is False


def test_verify_input_errors():
    assert cli("verify", "oracle", "--prime", 4).returncode == 2
    assert cli("verify", "oracle", "--prime", 3, "--lambda", 2, "--precision", 3).returncode == 2
    assert cli("verify", "feq", "--m", 3, "--e", 1, "--prime", 3).returncode == 2
    assert cli("verify", "nonsense").returncode == 2


def test_deterministic_output():
    a = cli("verify", "plancherel", "--m", 2, "--seed", 3, "--json")
    b = cli("verify", "plancherel", "--m", 2, "--seed", 3, "--json")
    assert a.returncode == 0 and a.stdout == b.stdout


def test_threads_do_not_change_results():
    import os
    env = dict(os.environ)
    env["UNITARY_SPHERICAL_THREADS"] = "4"
    a = cli("verify", "plancherel", "--m", 4, "--grid", 128, "--json")
    b = cli("verify", "plancherel", "--m", 4, "--grid", 128, "--json", env=env)
    ra, rb = json.loads(a.stdout), json.loads(b.stdout)
    for ca, cb in zip(ra["checks"], rb["checks"]):
        assert abs(ca["residual"] - cb["residual"]) < 1e-12
