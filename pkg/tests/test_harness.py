import csv
import json

import numpy as np
import pytest

from ffscale.errors import ConfigError
from ffscale.harness import cli
from ffscale.harness.config import bundled, bundled_scenarios, load_scenario, scenario_from_dict
from ffscale.harness.report import CheckRecord, VerificationReport, csv_header
from ffscale.harness.sweep import sweep_adiabatic, sweep_row, worker_count
from ffscale.harness.verify import enabled_checks, run, verify

LZ_SYSTEM = {"type": "two_level", "t_ref": 20.0, "hx": {"kind": "constant", "params": [1.0]},
             "hz": {"kind": "linear", "params": [-10.0, 1.0]}}


def lz_dict(**overrides):
    d = {"system": dict(LZ_SYSTEM), "initial_state": {"eigenstate": 0},
         "rescaling": {"kind": "linear", "t_ff": 4.0}, "integrator": {"dt": 4e-3}}
    d.update(overrides)
    return d


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


class TestConfig:
    def test_bundled_present(self):
        names = {p.stem for p in bundled_scenarios()}
        assert {"identity", "lz_ff5", "pause", "rewind", "slowdown", "smooth_ramp",
                "four_level", "degenerate"} <= names

    @pytest.mark.parametrize("path", bundled_scenarios(), ids=lambda p: p.stem)
    def test_bundled_validate(self, path):
        sc = load_scenario(path)
        assert sc.name == path.stem
        assert sc.schedule.t_ff > 0

    def test_lz_ff5_contents(self):
        sc = load_scenario(bundled("lz_ff5"))
        assert sc.reference.t_ref == 20.0
        assert sc.schedule.t_ff == 4.0
        assert sc.schedule.eval(1.0) == (5.0, 5.0)
        assert sc.route == "both"
        assert sc.control_basis[0] == ("X", "Y", "Z")

    def test_schema_error_names_field(self):
        bad = lz_dict(integrator={"dt": -1.0})
        with pytest.raises(ConfigError, match="integrator/dt"):
            scenario_from_dict(bad)

    def test_unknown_field(self):
        with pytest.raises(ConfigError, match="frobnicate"):
            scenario_from_dict(lz_dict(frobnicate=1))

    def test_json_syntax_error_position(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text('{\n  "system": {,\n}')
        with pytest.raises(ConfigError, match="line 2 column"):
            load_scenario(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_scenario(tmp_path / "nope.json")

    def test_semantic_errors(self):
        with pytest.raises(ConfigError, match="t_ff"):
            scenario_from_dict(lz_dict(rescaling={"kind": "linear"}))
        with pytest.raises(ConfigError, match="eigenstate"):
            scenario_from_dict(lz_dict(initial_state={"eigenstate": 5}))
        with pytest.raises(ConfigError, match="normalised"):
            scenario_from_dict(lz_dict(initial_state={"amplitudes": {"re": [1.0, 1.0]}}))
        with pytest.raises(ConfigError, match="rescaling"):
            scenario_from_dict(lz_dict(rescaling={"kind": "pause", "t_ff": 4.0, "window": [3.0, 1.0]}))
        with pytest.raises(ConfigError, match="rewind_rate"):
            scenario_from_dict(lz_dict(rescaling={"kind": "rewind", "t_ff": 4.0, "window": [1.0, 2.0]}))

    def test_generic_system(self):
        data = {"system": {"type": "generic", "t_ref": 1.0, "basis": ["X", {"re": [[1, 0], [0, -1]]}],
                           "schedules": [{"kind": "constant", "params": [1.0]},
                                         {"kind": "linear", "params": [0.0, 1.0]}]},
                "initial_state": {"amplitudes": {"re": [1.0, 0.0]}},
                "rescaling": {"kind": "piecewise", "segments": [{"duration": 0.5, "rate": 2.0}]}}
        sc = scenario_from_dict(data)
        assert sc.reference.dim == 2
        assert sc.control_basis is None
        assert sc.schedule.t_ff == 0.5

    def test_control_basis_dimension(self):
        data = lz_dict(control_basis={"labels": ["A"], "operators": [{"re": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]}]})
        with pytest.raises(ConfigError, match="dimension"):
            scenario_from_dict(data)


class TestReport:
    def test_duplicate_rejected(self):
        rep = VerificationReport("x")
        rep.add(CheckRecord("a", 0.0, 1.0, True))
        with pytest.raises(ValueError):
            rep.add(CheckRecord("a", 0.0, 1.0, True))

    def test_json_handles_nan(self):
        rep = VerificationReport("x")
        rep.add(CheckRecord("a", float("nan"), 1.0, False, {"s": 1.0}))
        data = json.loads(rep.to_json())
        assert data["checks"][0]["residual"] is None
        assert data["passed"] is False


class TestVerify:
    def test_identity_all_pass(self):
        sc = load_scenario(bundled("identity"))
        sc.dt = 4e-3
        rep = verify(sc)
        assert rep.passed, "\n".join(rep.lines())
        assert [c.name for c in rep.checks] == enabled_checks(sc)
        assert "identity_recovery" in enabled_checks(sc)

    def test_lz_route_equivalence(self):
        rep = verify(load_scenario(bundled("lz_ff5")))
        assert rep.passed, "\n".join(rep.lines())
        assert rep["route_equivalence"].residual < 1e-8
        assert rep["population_matching"].residual < 1e-5

    def test_degenerate_surfaces_failed_check(self):
        rep = verify(load_scenario(bundled("degenerate")))
        assert not rep.passed
        spec = rep["spectrum"]
        assert not spec.passed
        assert spec.location["s"] == pytest.approx(10.0)
        assert "degenerate" in spec.note
        assert [c.name for c in rep.checks] == enabled_checks(load_scenario(bundled("degenerate")))

    def test_tight_tolerance_fails(self):
        sc = scenario_from_dict(lz_dict(verify={"tolerances": {"population_matching": 1e-12},
                                               "gauge_check": False}))
        rep = verify(sc)
        assert not rep["population_matching"].passed
        assert "t" in rep["population_matching"].location
        assert rep["diagonal_rule"].passed

    def test_pause_check_enabled(self):
        sc = load_scenario(bundled("pause"))
        assert "pause_constancy" in enabled_checks(sc)


class TestRunOutput:
    def test_csv_header_and_determinism(self, tmp_path):
        sc = scenario_from_dict(lz_dict(outputs={"stride": 7}))
        res1, res2 = run(sc), run(sc)
        from ffscale.harness.report import write_trajectory_csv

        write_trajectory_csv(res1, tmp_path / "a.csv", sc.stride)
        write_trajectory_csv(res2, tmp_path / "b.csv", sc.stride)
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        with open(tmp_path / "a.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["t", "s", "ds_dt", "p_ref_0", "p_ref_1", "p_ff_0", "p_ff_1", "f_0", "f_1",
                           "cd_X", "cd_Y", "cd_Z", "nad_X", "nad_Y", "nad_Z", "cd_residual", "nad_residual"]
        assert float(rows[-1][0]) == 4.0
        assert len(rows) - 1 == len(range(0, res1.times.size, 7)) + 1
        # shortest round-trip decimal
        for text in rows[1][:3] + rows[5]:
            assert repr(float(text)) == text

    def test_decomposition_matches_analytic_cd(self):
        sc = scenario_from_dict(lz_dict())
        res = run(sc)
        dec = res.decomposition
        # H_cd = theta' Y for the two-level family
        assert np.max(np.abs(dec["cd"][:, 0])) < 1e-12
        assert np.max(np.abs(dec["cd"][:, 2])) < 1e-12
        assert np.max(dec["cd_residual"]) < 1e-12

    def test_header_without_basis(self):
        sc = load_scenario(bundled("four_level"))
        res = run(sc, with_reference=False, route="direct")
        assert csv_header(res, 4)[-1] == "f_3"


class TestSweep:
    def test_identity_limit_row(self):
        sc = scenario_from_dict(lz_dict())
        row = sweep_row(sc, 2.0, 2.0, dt=2e-3)
        assert row["error"] == ""
        assert row["final_phase_spread"] == 0.0
        assert row["infidelity"] == pytest.approx(row["diabatic_error"], abs=1e-5)

    def test_small_sweep_monotone(self):
        sc = scenario_from_dict(lz_dict())
        rows = sweep_adiabatic(sc, [5.0, 20.0], 2.0, dt=2e-3, workers=1)
        assert rows[0]["infidelity"] > rows[1]["infidelity"]
        assert rows[1]["phase_bound"] == pytest.approx(4 * rows[0]["phase_bound"])

    def test_error_recorded_per_row(self):
        sc = load_scenario(bundled("degenerate"))
        rows = sweep_adiabatic(sc, [4.0], 2.0, dt=1e-2, workers=1)
        assert "degenerate" in rows[0]["error"]

    def test_argument_checks(self):
        sc = scenario_from_dict(lz_dict())
        with pytest.raises(ValueError, match="ascending"):
            sweep_adiabatic(sc, [10.0, 5.0], 2.0)
        with pytest.raises(ValueError):
            sweep_adiabatic(sc, [], 2.0)

    def test_thread_cap(self, monkeypatch):
        monkeypatch.setenv("FFSCALE_THREADS", "2")
        assert worker_count(10) == 2
        assert worker_count(1) == 1
        monkeypatch.delenv("FFSCALE_THREADS")
        assert worker_count(3) >= 1


class TestCLI:
    def test_run_writes_csv_and_figure(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "lz.json", lz_dict(outputs={"stride": 25}))
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
        out = tmp_path / "out"
        assert (out / "trajectory.csv").exists()
        assert (out / "populations.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
        summary = json.loads((out / "summary.json").read_text())
        assert summary["population_deviation"] < 1e-5
        assert "max population deviation" in capsys.readouterr().out

    def test_run_no_plots(self, tmp_path):
        cfg = write_json(tmp_path / "lz.json", lz_dict())
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--no-plots"]) == 0
        assert not (tmp_path / "o" / "populations.png").exists()

    def test_invalid_config_exit_2_no_output(self, tmp_path, capsys):
        cfg = write_json(tmp_path / "bad.json", lz_dict(integrator={"dt": "fast"}))
        assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert not (tmp_path / "o").exists()
        assert "integrator/dt" in capsys.readouterr().err

    def test_numeric_failure_exit_3(self, tmp_path):
        assert cli.main(["run", "--config", "degenerate", "--out", str(tmp_path / "o")]) == 3
        assert not (tmp_path / "o").exists()

    def test_verify_exit_codes(self, tmp_path, capsys):
        assert cli.main(["verify", "--config", "degenerate"]) == 4
        assert "[FAIL] spectrum" in capsys.readouterr().out
        cfg = write_json(tmp_path / "ok.json", lz_dict(verify={"gauge_check": False}))
        assert cli.main(["verify", "--config", str(cfg), "--json"]) == 0
        assert json.loads(capsys.readouterr().out)["passed"] is True

    def test_sweep(self, tmp_path):
        cfg = write_json(tmp_path / "lz.json", lz_dict())
        code = cli.main(["sweep", "--config", str(cfg), "--tref", "4,16", "--tff", "2",
                         "--dt", "2e-3", "--out", str(tmp_path / "sw")])
        assert code == 0
        with open(tmp_path / "sw" / "sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [float(r["t_ref"]) for r in rows] == [4.0, 16.0]
        assert float(rows[0]["infidelity"]) > float(rows[1]["infidelity"])
        assert (tmp_path / "sw" / "sweep.png").exists()

    def test_bad_usage(self):
        assert cli.main(["sweep", "--config", "lz_ff5", "--tref", "a,b", "--out", "x"]) == 2
        assert cli.main([]) == 2

    def test_unknown_bundled_name(self, capsys):
        assert cli.main(["verify", "--config", "nonexistent"]) == 2
