import numpy as np
import pytest

from foops.problems import PreferenceSpec, make_quadratic_pair, with_preference
from foops.solver import SolverConfig, solve
from foops.trace import SCHEMA, SolveTrace, TraceRow, read_csv, write_json


@pytest.fixture(scope="module")
def trace():
    p = with_preference(make_quadratic_pair(), PreferenceSpec([1.0, 1.0]))
    return solve(p, SolverConfig(alpha=0.02, x0=np.array([0.7]), T_max=10, eps_stop=1e-300))


class TestCSV:
    def test_round_trip(self, trace, tmp_path):
        path = tmp_path / "t.csv"
        trace.write_csv(path)
        header, rows = read_csv(path)
        assert header == trace.header()
        assert len(rows) == len(trace)
        for rec, row in zip(rows, trace.rows):
            assert rec["iter"] == row.iter
            assert rec["f0"] == row.f0
            assert rec["F_2"] == row.F[1]
            np.testing.assert_array_equal(rec["x"], row.x)

    def test_schema_line(self, trace, tmp_path):
        path = tmp_path / "t.csv"
        trace.write_csv(path)
        assert path.read_text().splitlines()[0] == f"# schema={SCHEMA}"

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("iter,f0\n0,1.0\n")
        with pytest.raises(ValueError):
            read_csv(path)

    def test_nan_round_trip(self, tmp_path):
        tr = SolveTrace("ls")
        nan = float("nan")
        tr.append(TraceRow(0, np.array([1.0, 2.0]), np.array([0.5, 0.25]), 3.0, nan, nan, nan, nan, 0.1, 0, nan))
        tr.write_csv(tmp_path / "n.csv")
        _, rows = read_csv(tmp_path / "n.csv")
        assert np.isnan(rows[0]["merit_gap"])
        np.testing.assert_array_equal(rows[0]["x"], [1.0, 2.0])


class TestSummary:
    def test_fields(self, trace):
        s = trace.summary()
        assert s["status"] == "max_iter"
        assert s["iterations"] == 10
        assert s["method"] == "foops"
        assert "certified_merit_gap" in s
        assert isinstance(s["x"][0], float)

    def test_json(self, trace, tmp_path):
        import json

        write_json(trace.summary(), tmp_path / "s.json")
        loaded = json.loads((tmp_path / "s.json").read_text())
        assert loaded["iterations"] == 10

    def test_column(self, trace):
        np.testing.assert_array_equal(trace.column("iter"), np.arange(11))
