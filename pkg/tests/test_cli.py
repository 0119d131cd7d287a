"""Command line front end: exit codes, report determinism, file handling."""

import json

import numpy as np
import pytest

from j2lab.cli import main


@pytest.fixture()
def leo_file(tmp_path):
    path = tmp_path / "leo.json"
    path.write_text(json.dumps({"keplerian": {
        "a": 1.1, "e": 0.05, "i_deg": 50.0, "raan_deg": 20.0,
        "argp_deg": 60.0, "M_deg": 40.0}}))
    return str(path)


class TestVerifyCommand:
    def test_passing_suite_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["verify", "--suite", "homological", "--n-points", "50",
                     "--seed", "7", "--tol", "1e-6", "--no-timestamp",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["pass"] is True
        assert doc["reports"][0]["max_scaled_residual"] < 1e-6
        assert doc["reports"][0]["worst"]  # offenders listed with points

    def test_impossible_tolerance_exits_one(self, tmp_path):
        code = main(["verify", "--suite", "homological", "--n-points", "20",
                     "--seed", "7", "--tol", "1e-18", "--no-timestamp",
                     "--out", str(tmp_path / "r.json")])
        assert code == 1

    def test_unknown_suite_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["verify", "--suite", "unknown"])
        assert err.value.code == 2

    def test_zero_points_is_usage_error(self):
        with pytest.raises(SystemExit) as err:
            main(["verify", "--suite", "brackets", "--n-points", "0"])
        assert err.value.code == 2

    def test_reports_are_reproducible(self, tmp_path):
        """Identical (config, seed) gives byte-identical output."""
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        argv = ["verify", "--suite", "decompositions", "--n-points", "40",
                "--seed", "11", "--no-timestamp"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_report(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        main(["verify", "--suite", "decompositions", "--n-points", "40",
              "--seed", "11", "--no-timestamp", "--out", str(a)])
        main(["verify", "--suite", "decompositions", "--n-points", "40",
              "--seed", "12", "--no-timestamp", "--out", str(b)])
        assert a.read_bytes() != b.read_bytes()


class TestPropagateCommand:
    def test_writes_csv_with_summary(self, tmp_path, leo_file, capsys):
        out = tmp_path / "traj.csv"
        code = main(["propagate", "--model", "main", "--state-file", leo_file,
                     "--orbits", "1", "--tol", "1e-11", "--samples", "20",
                     "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,x,y,z,vx,vy,vz,H,Theta,N"
        assert len(lines) == 21
        assert "energy_drift" in capsys.readouterr().err

    def test_circular_kepler_radius_constant(self, tmp_path):
        state = tmp_path / "circ.json"
        state.write_text(json.dumps({"keplerian": {
            "a": 1.3, "e": 0.0, "i_deg": 30.0, "raan_deg": 0.0,
            "argp_deg": 0.0, "M_deg": 0.0}}))
        out = tmp_path / "c.csv"
        code = main(["propagate", "--model", "main", "--state-file", str(state),
                     "--c20", "0.0", "--orbits", "2", "--samples", "30",
                     "--out", str(out)])
        assert code == 0
        rows = np.loadtxt(str(out), delimiter=",", skiprows=1)
        r = np.linalg.norm(rows[:, 1:4], axis=1)
        assert np.max(np.abs(r - 1.3)) < 1e-9

    def test_intermediary_model(self, tmp_path, leo_file):
        out = tmp_path / "i.csv"
        code = main(["propagate", "--model", "intermediary-truncated",
                     "--state-file", leo_file, "--order", "3", "--orbits", "1",
                     "--samples", "10", "--out", str(out)])
        assert code == 0

    def test_intermediary_from_cartesian_state(self, tmp_path):
        state = tmp_path / "cart.json"
        state.write_text(json.dumps({"cartesian": {
            "position": [1.05, 0.1, 0.2], "velocity": [-0.05, 0.85, 0.35]}}))
        out = tmp_path / "ic.csv"
        code = main(["propagate", "--model", "intermediary", "--state-file",
                     str(state), "--orbits", "1", "--samples", "8",
                     "--out", str(out)])
        assert code == 0

    def test_missing_file_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as err:
            main(["propagate", "--model", "main", "--state-file",
                  str(tmp_path / "nope.json"), "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2

    def test_malformed_json_reports_location(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text("{broken")
        with pytest.raises(SystemExit) as err:
            main(["propagate", "--model", "main", "--state-file", str(bad),
                  "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2
        message = capsys.readouterr().err
        assert "line 1" in message and "column" in message

    def test_two_charts_is_usage_error(self, tmp_path, capsys):
        bad = tmp_path / "two.json"
        bad.write_text(json.dumps({"delaunay": {}, "cartesian": {}}))
        with pytest.raises(SystemExit) as err:
            main(["propagate", "--model", "main", "--state-file", str(bad),
                  "--out", str(tmp_path / "x.csv")])
        assert err.value.code == 2
        assert "exactly one" in capsys.readouterr().err

    def test_out_required(self, leo_file):
        with pytest.raises(SystemExit) as err:
            main(["propagate", "--model", "main", "--state-file", leo_file])
        assert err.value.code == 2


class TestCompareCommand:
    def test_two_orders_two_exponent_rows(self, tmp_path, leo_file):
        out = tmp_path / "cmp.json"
        code = main(["compare", "--orbit-file", leo_file, "--orders", "1,2",
                     "--c20-sweep", "1e-3,3e-4", "--orbits", "2",
                     "--samples", "32", "--jobs", "1", "--no-timestamp",
                     "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        fits = doc["report"]["fitted_scaling_exponent"]
        assert set(fits) == {"1", "2"}
        assert fits["1"]["exponent"] == pytest.approx(2.0, abs=0.5)
        assert fits["2"]["exponent"] == pytest.approx(3.0, abs=0.7)

    def test_single_sweep_value_is_usage_error(self, leo_file):
        with pytest.raises(SystemExit) as err:
            main(["compare", "--orbit-file", leo_file, "--c20-sweep", "1e-3"])
        assert err.value.code == 2


class TestAverageAndTerms:
    def test_average_known_term(self, tmp_path, leo_file):
        out = tmp_path / "avg.json"
        code = main(["average", "--term", "Htilde01", "--state-file", leo_file,
                     "--no-timestamp", "--out", str(out)])
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["term"] == "Htilde01"
        assert doc["value"] != 0.0

    def test_average_unknown_term(self, leo_file):
        with pytest.raises(SystemExit) as err:
            main(["average", "--term", "nope", "--state-file", leo_file])
        assert err.value.code == 2

    def test_terms_dump(self, tmp_path):
        out = tmp_path / "terms.json"
        assert main(["terms", "--no-timestamp", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        names = {t["name"] for t in doc["terms"]}
        assert {"H01_neutral", "W1_brouwer", "K03_perigee"} <= names
        assert all({"family", "order", "name", "chart"} <= set(t)
                   for t in doc["terms"])

    def test_csv_output_mode(self, tmp_path):
        out = tmp_path / "verify.csv"
        code = main(["verify", "--suite", "decompositions", "--n-points", "20",
                     "--output", "csv", "--no-timestamp", "--out", str(out)])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "suite,check,max,p50,p90,p99,tol,pass"
        assert len(lines) == 3  # two checks in the suite

    def test_toml_config_defaults(self, tmp_path, leo_file):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text('[average]\nnodes = 128\nterm = "Htilde01"\n')
        out = tmp_path / "avg.json"
        code = main(["--config", str(cfg), "average", "--state-file", leo_file,
                     "--term", "Htilde01", "--no-timestamp", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["config"]["nodes"] == 128
