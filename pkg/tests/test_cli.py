import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from discrete_ep2 import cli
from discrete_ep2.analysis import b_star
from discrete_ep2.model import Dirichlet, Parameters, residual_inf


@pytest.fixture
def run(tmp_path, capsys):
    def _run(command, config, *flags):
        path = tmp_path / "job.json"
        path.write_text(json.dumps(config))
        code = cli.main([command, "--config", str(path), *flags])
        out, err = capsys.readouterr()
        return code, out, err
    return _run


def read_csv(text):
    return list(csv.reader(io.StringIO(text)))


class TestSolve:
    def test_constant_solution_csv(self, run):
        code, out, _ = run("solve", {"a": 1, "b": 0, "c": -1, "N": 2, "dirichlet": [1, 1]},
                           "--format", "csv")
        assert code == 0
        assert read_csv(out) == [["x", "u"], ["0", "1"], ["1", "1"], ["2", "1"]]

    def test_c_zero(self, run):
        code, out, err = run("solve", {"a": 1, "b": 0, "c": 0, "N": 2, "dirichlet": [1, 1]})
        assert code == 1 and "c must be nonzero" in err and out == ""

    def test_homotopy_report(self, run):
        code, out, _ = run("solve", {"a": -1, "b": 0, "c": 1, "N": 4, "dirichlet": [0, 0],
                                     "method": "homotopy"})
        report = json.loads(out)
        assert code == 0
        assert list(report) == ["method", "residual_inf", "iterations", "solution", "bounds",
                                "conditions"]
        assert report["method"] == "homotopy" and report["residual_inf"] <= 1e-10
        assert report["bounds"] is None

    def test_round_trip(self, run, tmp_path):
        out_path = tmp_path / "report.json"
        code, _, _ = run("solve", {"problem": {"a": 1, "b": 1, "c": -1, "N": 6},
                                   "boundary": {"dirichlet": [0.7, 1.3]}}, "--out", str(out_path))
        report = json.loads(out_path.read_text())
        assert code == 0
        u = np.array(report["solution"])
        recomputed = residual_inf(Parameters(1, 1, -1, 6), Dirichlet(0.7, 1.3), u)
        assert abs(recomputed - report["residual_inf"]) <= 1e-12
        alpha, beta = np.array(report["bounds"]["alpha"]), np.array(report["bounds"]["beta"])
        assert np.all(alpha <= u) and np.all(u <= beta)
        assert report["conditions"][0]["condition_id"] == "uniq_dirichlet"

    def test_csv_rows(self, run):
        code, out, _ = run("solve", {"a": 2, "b": 0.5, "c": -1, "N": 7, "dirichlet": [1, 2]},
                           "--format", "csv")
        rows = read_csv(out)
        assert code == 0 and len(rows) == 9
        assert [r[0] for r in rows[1:]] == [str(x) for x in range(8)]

    def test_hypothesis_violation_message(self, run):
        code, _, err = run("solve", {"a": -1, "b": 1, "c": -1, "N": 4, "dirichlet": [0.5, 0.5]})
        assert code == 1
        assert "beta-cond: 4b^3 >= -27ca^2 violated" in err

    def test_solver_failure_exit_2(self, run):
        code, out, err = run("solve", {"a": 1, "b": -1, "c": 10, "N": 3, "dirichlet": [1, 0]})
        assert code == 2 and "stopped at c" in err
        assert json.loads(out)["method"] == "small_c_homotopy"

    def test_tol_flag(self, run):
        code, out, _ = run("solve", {"a": 1, "b": 1, "c": -1, "N": 4, "dirichlet": [1, 1]},
                           "--tol", "1e-13")
        assert code == 0 and json.loads(out)["residual_inf"] <= 1e-13


class TestConfigErrors:
    @pytest.mark.parametrize("config", [
        {"a": 1, "b": 0, "c": -1, "dirichlet": [1, 1]},
        {"a": 1, "b": 0, "c": -1, "N": 2.5, "dirichlet": [1, 1]},
        {"a": 1, "b": 0, "c": -1, "N": 3, "A": 1, "dirichlet": [1, 1]},
        {"a": 1, "b": 0, "c": -1, "N": 3, "dirichlet": [1, 1], "method": "magic"},
        {"a": 1, "b": 0, "c": -1, "N": 3, "dirichlet": [1, 1], "solver": {"nope": 1}},
        {"a": 1, "b": 0, "c": -1, "N": 3, "robin": {"f0": {"terms": [[1, 5]]}, "fN": 0}},
        {"a": 1, "b": 0, "c": -1, "N": 3},
        [1, 2],
    ])
    def test_exit_1(self, run, config):
        code, _, err = run("solve", config)
        assert code == 1 and err.startswith("error:")

    def test_missing_file(self, tmp_path, capsys):
        assert cli.main(["solve", "--config", str(tmp_path / "none.json")]) == 1

    def test_bad_json(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert cli.main(["solve", "--config", str(path)]) == 1

    def test_log_level(self, run, monkeypatch):
        monkeypatch.setenv("EP2_LOG_LEVEL", "chatty")
        code, _, err = run("solve", {"a": 1, "b": 0, "c": -1, "N": 2, "dirichlet": [1, 1]})
        assert code == 1 and "EP2_LOG_LEVEL" in err


class TestConditions:
    def test_uniqueness(self, run):
        code, out, _ = run("conditions", {"a": 1, "b": 0, "c": -4, "N": 4, "dirichlet": [1, 1]})
        (rep,) = json.loads(out)
        assert code == 0 and rep["holds"] and rep["margin"] == pytest.approx(3.1953, abs=1e-4)

    def test_beta_cond(self, run):
        _, out, _ = run("conditions", {"a": -1, "b": 1, "c": -1, "N": 4, "dirichlet": [1, 1]})
        assert json.loads(out)[0]["margin"] == -23
        _, out, _ = run("conditions", {"a": -1, "b": 1.5, "c": -0.5, "N": 4})
        rep = json.loads(out)[0]
        assert rep["margin"] == 0 and rep["holds"]

    def test_csv(self, run):
        _, out, _ = run("conditions", {"a": 1, "b": 0, "c": -4, "N": 4, "dirichlet": [0, 0]},
                        "--format", "csv")
        rows = read_csv(out)
        assert rows[0] == ["condition_id", "holds", "margin", "details"]
        assert {r[0] for r in rows[1:]} == {"uniq_dirichlet", "homogeneous_regime"}


class TestEnumerate:
    def test_constant(self, run):
        code, out, _ = run("enumerate", {"a": 1, "b": 0, "c": -1, "N": 2, "dirichlet": [1, 1]})
        result = json.loads(out)
        assert code == 0 and result["count"] == 1
        assert result["solutions"][0]["solution"] == [1.0, 1.0, 1.0]
        assert result["scan"]["resolution"] == 1e-3

    def test_budget(self, run):
        code, _, err = run("enumerate", {"a": 1, "b": 0, "c": -1, "N": 9, "dirichlet": [1, 1]})
        assert code == 1 and "enumeration budget" in err

    def test_large_c_empty(self, run):
        _, out, _ = run("enumerate", {"a": 1, "b": 0, "c": 50, "N": 3, "dirichlet": [1, 1]})
        assert json.loads(out)["count"] == 0

    def test_seeded_offset(self, run):
        config = {"a": -2, "b": 3, "c": 0.01, "N": 2, "dirichlet": [1, 1]}
        _, out1, _ = run("enumerate", config, "--seed", "5")
        _, out2, _ = run("enumerate", config, "--seed", "5")
        r1, r2 = json.loads(out1), json.loads(out2)
        assert r1["scan"]["offset"] == r2["scan"]["offset"] > 0
        assert r1["count"] == 3


class TestSweep:
    def test_b_transition_at_b_star(self, run):
        bs = b_star(Parameters(-1, 0, -1, 6), Dirichlet(0.5, 0.5))
        config = {"a": -1, "b": 0, "c": -1, "N": 6, "dirichlet": [0.5, 0.5],
                  "sweep": {"b": {"start": bs - 1, "stop": bs + 1, "num": 40}}}
        code, out, _ = run("sweep", config, "--workers", "2")
        rows = read_csv(out)[1:]
        assert code == 0 and len(rows) == 40
        assert [int(r[0]) for r in rows] == list(range(40))
        ok = np.array([r[2] == "true" for r in rows])
        b = np.array([float(r[1]) for r in rows])
        first = np.argmax(ok)
        assert ok[first:].all() and not ok[:first].any()
        assert b[first - 1] < bs <= b[first]

    def test_c_sweep_fails_for_large_c(self, run):
        config = {"a": -1, "b": 3, "c": -1, "N": 6, "dirichlet": [0.5, 0.5],
                  "sweep": {"c": {"start": -8, "stop": -0.1, "num": 21}}}
        _, out, _ = run("sweep", config, "--format", "json", "--workers", "1")
        table = json.loads(out)
        for row in table:
            assert row["success"] is (abs(row["c"]) <= 4)

    def test_single_point_matches_solve(self, run):
        base = {"a": 1, "b": 1, "c": -1, "N": 5, "dirichlet": [1, 2]}
        _, out, _ = run("sweep", {**base, "sweep": {"b": [1.0]}}, "--format", "json")
        (row,) = json.loads(out)
        _, out, _ = run("solve", base)
        report = json.loads(out)
        assert row["residual_inf"] == report["residual_inf"]
        assert row["u_max"] == max(report["solution"])

    def test_two_parameters_and_limits(self, run):
        base = {"a": 1, "b": 1, "c": -1, "N": 3, "dirichlet": [1, 1]}
        _, out, _ = run("sweep", {**base, "sweep": {"D0": [0.5, 1], "DN": [1, 2, 3]}}, "--workers", "1")
        rows = read_csv(out)
        assert rows[0][:3] == ["index", "D0", "DN"] and len(rows) == 7
        code, _, _ = run("sweep", {**base, "sweep": {"a": {"start": 1, "stop": 2, "num": 20000}}})
        assert code == 1
        code, _, _ = run("sweep", {**base, "sweep": {"a": [1], "b": [1], "c": [-1]}})
        assert code == 1
        code, _, _ = run("sweep", {**base, "sweep": {"N": [3]}})
        assert code == 1


class TestContinuum:
    def test_constant(self, run):
        code, out, _ = run("continuum", {"A": 1, "B": 0, "C": -1, "y0": 1, "y1": 1, "Ns": [4, 8, 16]},
                           "--format", "json")
        result = json.loads(out)
        assert code == 0
        assert all(r["sup_difference"] is None or r["sup_difference"] < 1e-12 for r in result["table"])

    def test_ratios(self, run):
        code, out, _ = run("continuum", {"A": 1, "B": 1, "C": -1, "dirichlet": [1, 1],
                                         "Ns": [16, 32, 64, 128]})
        lines = out.splitlines()
        rows = read_csv("\n".join(l for l in lines if not l.startswith("#")))
        ratios = [float(r[2]) for r in rows[1:] if r[2]]
        assert code == 0 and len(ratios) == 2 and all(3 <= r <= 5 for r in ratios)
        assert any(l.startswith("# limiting_uniqueness_margin") for l in lines)

    def test_beta_cond_threshold(self, run):
        _, out, _ = run("continuum", {"A": -1, "B": 10, "C": -1, "y0": 0.5, "y1": 0.5,
                                      "Ns": [2, 4, 8]}, "--format", "json")
        result = json.loads(out)
        assert result["beta_cond_N0"] == 6

    def test_partial_table_exit_2(self, run):
        code, out, err = run("continuum", {"A": -1, "B": 6.5, "C": -1, "y0": 0.5, "y1": 0.5,
                                           "Ns": [2, 3, 4]}, "--format", "json")
        assert code == 2 and "N=4" in err
        assert [r["N"] for r in json.loads(out)["table"]] == [2, 3]


def test_module_entry_point(tmp_path):
    path = tmp_path / "job.json"
    path.write_text(json.dumps({"a": 1, "b": 0, "c": -1, "N": 2, "dirichlet": [1, 1]}))
    proc = subprocess.run([sys.executable, "-m", "discrete_ep2", "solve", "--config", str(path)],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["solution"] == [1.0, 1.0, 1.0]
