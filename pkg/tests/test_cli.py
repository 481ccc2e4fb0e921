import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from relaxqp.cli import main
from relaxqp.io import InputError, dumps, loads_problem, problem_document
from relaxqp import ElasticProblem, QpProblem

ONE_D = {"Q": [[1.0]], "q": [0.0], "G": [[-1.0]], "h": [-1.0]}
PAIR = {"Q": [[1.0]], "q": [0.0], "G": [[1.0], [-1.0]], "h": [-1.0, -1.0]}


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="p.json"):
        path = tmp_path / name
        path.write_text(doc if isinstance(doc, str) else json.dumps(doc))
        return str(path)

    return _write


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_round_trip(rng):
    problem = QpProblem(np.eye(2), [1.0, 2.0], A=[[1.0, 1.0]], b=[0.5], G=[[1.0, 0.0]], h=[3.0])
    again, settings = loads_problem(dumps(problem_document(problem, {"tol": 1e-9})))
    assert settings == {"tol": 1e-9}
    for name in ("Q", "q", "A", "b", "G", "h"):
        assert np.array_equal(getattr(again, name), getattr(problem, name))
    elastic, _ = loads_problem(json.dumps({**PAIR, "rho": [10.0, 10.0]}))
    assert isinstance(elastic, ElasticProblem)


@pytest.mark.parametrize(
    "text",
    ["{", "[]", '{"Q": [[1]]}', '{"Q": [[1]], "q": [0], "G": [[1]]}', '{"Q": [[1]], "q": [0], "bogus": 1}',
     '{"Q": [[1]], "q": [0], "A": [[1]], "b": [0], "rho": [1]}', '{"Q": [[1]], "q": ["x"]}'],
)
def test_bad_documents(text):
    with pytest.raises(InputError):
        loads_problem(text)


def test_solve_one_d(write, capsys):
    code, out, _ = run(["solve", write(ONE_D)], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["status"] == "converged"
    assert doc["x"][0] == pytest.approx(1.0, abs=1e-7)
    assert set(doc) >= {"x", "s", "z", "y", "iterations", "residual"}


def test_malformed_exit_1(write, capsys):
    code, _, err = run(["solve", write("{not json")], capsys)
    assert code == 1 and "invalid JSON" in err


def test_invalid_problem_exit_1(write, capsys):
    code, _, err = run(["solve", write({"Q": [[1.0, 2.0], [0.0, 1.0]], "q": [0, 0]})], capsys)
    assert code == 1 and "symmetric" in err


def test_elastic_flag(write, capsys):
    code, out, _ = run(["solve", write(PAIR), "--elastic", "--rho", "10"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["x"][0] == pytest.approx(0.0, abs=1e-7)
    assert doc["objective"] == pytest.approx(20.0, abs=1e-6)
    assert run(["solve", write(PAIR), "--elastic"], capsys)[0] == 1


def test_max_iters_exit_2(write, capsys):
    assert run(["solve", write(ONE_D), "--max-iters", "1"], capsys)[0] == 2


def test_infeasible_standard_nonzero(write, capsys):
    code, out, _ = run(["solve", write(PAIR)], capsys)
    assert code in (2, 3)
    assert json.loads(out)["status"] != "converged"


def test_batch_matches_sequential(write, capsys, tmp_path):
    paths = []
    for seed in range(4):
        path = str(tmp_path / f"g{seed}.json")
        assert run(["generate", "--seed", str(seed), "--n", "6", "--m", "2", "--p", "5", "-o", path], capsys)[0] == 0
        paths.append(path)
    code_seq, seq, _ = run(["solve", *paths], capsys)
    code_par, par, _ = run(["solve", "--jobs", "2", *paths], capsys)
    assert code_seq == code_par == 0
    assert seq == par
    assert len(json.loads(seq)) == 4


def test_batch_with_bad_file(write, capsys):
    code, out, _ = run(["solve", write(ONE_D, "a.json"), write("{", "b.json")], capsys)
    docs = json.loads(out)
    assert code == 1
    assert docs[0]["status"] == "converged" and "error" in docs[1]


def test_relax(write, capsys):
    code, out, _ = run(["relax", write(ONE_D), "--kappa", "0.01"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["x"][0] == pytest.approx(1.0099020, abs=1e-7)
    assert doc["s_z"][0] == pytest.approx(0.01, abs=1e-8)


def test_relax_below_mu(write, capsys):
    code, _, err = run(["relax", write(ONE_D), "--kappa", "1e-14", "--tol", "1e-3"], capsys)
    assert code == 1 and "below" in err


def test_relax_elastic(write, capsys):
    code, out, _ = run(["relax", write({**PAIR, "rho": [10.0, 10.0]}), "--kappa", "0.01"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert np.allclose(doc["s1_z1"], 0.01, atol=1e-8)
    assert np.allclose(doc["s2_z2"], 0.01, atol=1e-8)


def test_grad(write, capsys, tmp_path):
    code, out, _ = run(["grad", write(ONE_D), "--kappa", "1e-6", "--loss-grad", "1"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert doc["grad_h"][0] == pytest.approx(-1.0, abs=1e-3)
    seed_file = tmp_path / "seed.txt"
    seed_file.write_text("[0]")
    doc = json.loads(run(["grad", write(ONE_D), "--loss-grad-file", str(seed_file)], capsys)[1])
    assert all(not np.any(v) for k, v in doc.items() if k.startswith("grad_"))


def test_grad_check(capsys, tmp_path):
    path = str(tmp_path / "r.json")
    run(["generate", "--seed", "3", "--n", "4", "--m", "1", "--p", "3", "-o", path], capsys)
    code, out, _ = run(["grad", path, "--kappa", "1e-3", "--loss-grad", "1,-1,0.5,2", "--check"], capsys)
    assert code == 0
    assert json.loads(out)["check"]["max_relative_error"] <= 1e-4


def test_grad_bad_seed(write, capsys):
    assert run(["grad", write(ONE_D), "--loss-grad", "1,2"], capsys)[0] == 1
    assert run(["grad", write(ONE_D)], capsys)[0] == 1


def _csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_demo_contact(capsys):
    code, out, _ = run(["demo", "contact", "--kappa", "0.01", "--sweep", "5"], capsys)
    assert code == 0
    assert all(float(r["gradient"]) > 0 for r in _csv_rows(out))
    _, out, _ = run(["demo", "contact", "--kappa", "1e-8", "--sweep", "5"], capsys)
    below = [r for r in _csv_rows(out) if float(r["force"]) < float(r["threshold"])]
    assert below and all(abs(float(r["gradient"])) < 1e-6 for r in below)


def test_demo_collision(capsys):
    code, out, _ = run(["demo", "collision", "--kappa", "1e-8"], capsys)
    angles = np.array([float(r["angle_deg"]) for r in _csv_rows(out)])
    assert code == 0 and np.abs(np.diff(angles)).max() >= 80


def test_unknown_demo(capsys):
    assert run(["demo", "juggling"], capsys)[0] == 1


def test_module_entry_point(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(json.dumps(ONE_D))
    proc = subprocess.run([sys.executable, "-m", "relaxqp", "solve", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "converged"
