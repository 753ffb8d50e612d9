import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from foops.cli import EXIT_CONFIG, EXIT_OK, EXIT_RUNTIME, main
from foops.errors import InvalidComparisonError, InvalidInputError
from foops.experiments import (
    ExperimentSpec,
    SolverParams,
    compare_methods,
    format_table,
    nadir_point,
    pareto_front_sample,
    run_experiment,
)

FAST = ["--problem", "example1", "--q", "1", "--n-rays", "2", "--T-max", "60", "--K", "20"]


def _csv_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


class TestExperimentSpec:
    @pytest.mark.parametrize("kw", [
        dict(problem="zdt1"), dict(method="pmtl"), dict(init="fixed"), dict(scaling="log"),
        dict(repeats=0), dict(workers=0), dict(n_rays=0), dict(method="ls_sweep", n_weights=1),
        dict(solver=SolverParams(alpha=-1.0)), dict(ls_alpha=0.0),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(**kw)

    def test_unknown_key(self):
        with pytest.raises(InvalidInputError, match="unknown config keys"):
            ExperimentSpec.from_dict({"problme": "fig2"})

    def test_dict_round_trip(self, tmp_path):
        spec = ExperimentSpec(problem="quadratic_pair", rays=[[1.0, 1.0]], solver=SolverParams(alpha=0.02))
        path = tmp_path / "c.json"
        path.write_text(json.dumps(spec.to_dict()))
        assert ExperimentSpec.from_json(path) == spec

    def test_one_dimensional_problems(self):
        with pytest.raises(InvalidInputError):
            ExperimentSpec(problem="fig2", q=3).base_problem()

    def test_nadir(self):
        spec = ExperimentSpec()
        np.testing.assert_array_equal(nadir_point(spec, spec.base_problem()), [1.0, 1.0])
        qp = ExperimentSpec(problem="quadratic_pair")
        np.testing.assert_array_equal(nadir_point(qp, qp.base_problem()), [4.0, 4.0])


class TestRunExperiment:
    def test_outputs(self, tmp_path):
        spec = ExperimentSpec(n_rays=2, repeats=2, solver=SolverParams(T_max=40, K=20), out=str(tmp_path))
        rep = run_experiment(spec)
        assert len(rep.runs) == 4 and not rep.failures
        for name in ("summary.csv", "summary.json", "trajectories.csv", "front.csv"):
            assert (tmp_path / name).exists()
        assert len(list((tmp_path / "runs").glob("*.csv"))) == 4
        rows = _csv_rows(tmp_path / "summary.csv")
        assert {r["run_id"] for r in rows} == {"foops_p0_r0", "foops_p0_r1", "foops_p1_r0", "foops_p1_r1"}
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["config"]["n_rays"] == 2
        assert 0.0 <= summary["hypervolume"] <= 1.0

    def test_failures_recorded_not_raised(self, tmp_path):
        spec = ExperimentSpec(problem="quadratic_pair", rays=[[1.0, 1.0]], init="fixed", x0=[0.7],
                              solver=SolverParams(alpha=0.2), out=str(tmp_path))
        rep = run_experiment(spec)
        assert len(rep.failures) == 1
        assert "DivergedError" in rep.runs[0].error
        assert _csv_rows(tmp_path / "summary.csv")[0]["status"] == "diverged"

    def test_workers_match_serial(self):
        base = ExperimentSpec(n_rays=3, solver=SolverParams(T_max=30, K=10))
        serial = run_experiment(base)
        par = run_experiment(ExperimentSpec(**{**base.__dict__, "workers": 3}))
        for a, b in zip(serial.runs, par.runs):
            assert a.row["x"] == b.row["x"]

    def test_ls_sweep(self):
        rep = run_experiment(ExperimentSpec(method="ls_sweep", n_rays=1, n_weights=5, ls_T_max=50))
        assert len(rep.runs) == 5
        assert rep.runs[0].run_id == "ls_w0_p0_r0"

    def test_front_sample_non_dominated(self):
        xs, F = pareto_front_sample(ExperimentSpec(problem="quadratic_pair").base_problem())
        assert np.all(np.diff(F[:, 0]) > 0) and np.all(np.diff(F[:, 1]) < 0)
        assert xs.min() >= -1.0 - 0.0015 and xs.max() <= 1.0 + 0.0015  # one grid spacing


class TestCompare:
    def test_table(self):
        specs = [ExperimentSpec(n_rays=2, method=m, solver=SolverParams(T_max=40, K=20), ls_T_max=40)
                 for m in ("foops", "ls")]
        rows = compare_methods(specs)
        assert [r["method"] for r in rows] == ["foops", "foops", "ls", "ls"]
        assert "min_merit_gap" in format_table(rows).splitlines()[0]

    def test_mismatch(self):
        with pytest.raises(InvalidComparisonError):
            compare_methods([ExperimentSpec(n_rays=2), ExperimentSpec(n_rays=3)])


class TestCLI:
    def test_run_ok(self, tmp_path, capsys):
        assert main(["run", *FAST, "--out", str(tmp_path)]) == EXIT_OK
        assert "hypervolume=" in capsys.readouterr().out

    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"problem": "example1", "n_rays": 1, "solver": {"T_max": 5, "K": 5}}))
        out = tmp_path / "o"
        assert main(["run", "--config", str(cfg), "--T-max", "7", "--out", str(out)]) == EXIT_OK
        assert json.loads((out / "summary.json").read_text())["config"]["solver"]["T_max"] == 7

    @pytest.mark.parametrize("argv", [
        ["run", "--alpha", "-1"],
        ["run", "--problem", "nope"],
        ["run", "--init", "fixed"],
        ["bogus"],
        ["compare", "--methods", "foops,pmtl", "--T-max", "5"],
    ])
    def test_config_errors(self, argv, capsys):
        assert main(argv) == EXIT_CONFIG

    def test_missing_config_file(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG

    def test_runtime_failure(self, tmp_path):
        argv = ["run", "--problem", "quadratic_pair", "--ray", "1", "1", "--init", "fixed", "--x0", "0.7",
                "--alpha", "0.2", "--out", str(tmp_path)]
        assert main(argv) == EXIT_RUNTIME

    def test_deterministic_traces(self, tmp_path):
        for d in ("a", "b"):
            assert main(["run", *FAST, "--seed", "3", "--out", str(tmp_path / d)]) == EXIT_OK
        for f in (tmp_path / "a" / "runs").glob("*.csv"):
            assert f.read_bytes() == (tmp_path / "b" / "runs" / f.name).read_bytes()

    def test_sweep(self, tmp_path):
        assert main(["sweep", "--q", "1", "--n-rays", "1", "--n-weights", "3", "--out", str(tmp_path)]) == EXIT_OK
        assert len(_csv_rows(tmp_path / "summary.csv")) == 3

    def test_compare(self, tmp_path, capsys):
        assert main(["compare", *FAST, "--methods", "foops,ls_sweep", "--n-weights", "3",
                     "--out", str(tmp_path)]) == EXIT_OK
        rows = _csv_rows(tmp_path / "comparison.csv")
        assert {r["method"] for r in rows} == {"foops", "ls_sweep"}

    def test_merit_surface(self, tmp_path):
        argv = ["merit-surface", "--l", "0", "1", "--tau", "0.1", "--n", "5", "--grid-n", "301",
                "--out", str(tmp_path)]
        assert main(argv) == EXIT_OK
        rows = _csv_rows(tmp_path / "merit_surface.csv")
        assert len(rows) == 10
        for r in rows:
            v, u = float(r["v"]), float(r["u_bar_grid"])
            assert v >= -0.1 * np.log(2) - 1e-6
            if float(r["l"]) == 0.0:
                assert v <= u + 0.05

    def test_console_script(self):
        res = subprocess.run([sys.executable, "-m", "foops.cli", "--help"], capture_output=True, text=True)
        assert res.returncode == 0
        assert "merit-surface" in res.stdout
