"""CLI contract: exit codes, artifact schema, determinism, config round-trip."""

import json
from pathlib import Path

import pytest

from fracdyn.cli import ScenarioConfig, main
from fracdyn.errors import ConfigError

OSC = {
    "scenario": "oscillator-1d",
    "grid": {"h": 0.02, "t_end": 1.0},
    "parameters": {"alpha": 2.5, "omega2": 1.0},
    "initial": {"q": [1.0], "qdot": [0.0]},
    "output": {"prefix": "osc"},
}


def write_cfg(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


class TestConfig:
    def test_round_trip(self):
        cfg = ScenarioConfig.from_dict(OSC)
        assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg

    def test_round_trip_all_scenarios(self):
        variants = [
            {"scenario": "linear-nd", "parameters": {"alpha": 0.5, "a": [1.0, 2.0], "b": [0.5, -0.3]},
             "initial": {"q": [1.0, 0.5], "qdot": [2.0, -1.0]}},
            {"scenario": "case2-2d", "parameters": {"alpha": 0.5, "c": 1.0, "b2": 0.5},
             "initial": {"q": [1.0, 0.0], "qdot": [1.0, -1.0]}},
            {"scenario": "nonlinear-fracosc",
             "parameters": {"alpha": 1.5, "g": 1.0, "K": {"kind": "linear", "k": 1.0}},
             "initial": {"q": [1.0], "qdot": [0.0]}},
            {"scenario": "hamilton-linear", "parameters": {"alpha": 0.5, "A": [1.0, 2.0]},
             "initial": {"q": [0.0, 0.0], "p": [1.0, 1.0]}},
        ]
        for v in variants:
            raw = {"grid": {"h": 0.1, "t_end": 1.0}, **v}
            cfg = ScenarioConfig.from_dict(raw)
            assert ScenarioConfig.from_dict(cfg.to_dict()) == cfg

    def test_error_names_offending_key(self):
        bad = dict(OSC, grid={"h": -0.02, "t_end": 1.0})
        with pytest.raises(ConfigError) as exc:
            ScenarioConfig.from_dict(bad)
        assert "grid.h" in str(exc.value)

    def test_unknown_scenario(self):
        with pytest.raises(ConfigError) as exc:
            ScenarioConfig.from_dict(dict(OSC, scenario="wobble"))
        assert "scenario" in str(exc.value)


class TestRunVerb:
    def test_artifacts_and_schema(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        assert main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        traj = tmp_path / "osc_trajectory.csv"
        comp = tmp_path / "osc_comparison.csv"
        summ = tmp_path / "osc_summary.json"
        assert traj.exists() and comp.exists() and summ.exists()
        header = traj.read_text().splitlines()[0]
        assert header == "t,q_1,qdot_1,lambda,constraint_residual"
        assert comp.read_text().splitlines()[0] == "t,numerical,exact,abs_error"
        s = json.loads(summ.read_text())
        assert "wall_time_s" in s and "max_abs_error_vs_exact" in s
        assert s["max_abs_error_vs_exact"] < 1e-4

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", cfg, "--out", str(a), "--quiet"]) == 0
        assert main(["run", "--config", cfg, "--out", str(b), "--quiet"]) == 0
        for name in ("osc_trajectory.csv", "osc_comparison.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_malformed_config_no_artifacts(self, tmp_path):
        bad = dict(OSC, grid={"h": -0.02, "t_end": 1.0})
        cfg = write_cfg(tmp_path, bad)
        out = tmp_path / "out"
        assert main(["run", "--config", cfg, "--out", str(out), "--quiet"]) == 1
        assert not out.exists()

    def test_invalid_json(self, tmp_path):
        p = tmp_path / "broken.json"
        p.write_text("{not json")
        assert main(["run", "--config", str(p), "--quiet"]) == 1

    def test_missing_config_flag(self):
        assert main(["run", "--quiet"]) == 1

    def test_overrides(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        assert (
            main(["run", "--config", cfg, "--out", str(tmp_path), "--h", "0.05", "--quiet"])
            == 0
        )
        rows = (tmp_path / "osc_trajectory.csv").read_text().splitlines()
        assert len(rows) == 1 + 21  # header + nodes of [0,1] at h=0.05

    def test_lf_line_endings(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"])
        raw = (tmp_path / "osc_trajectory.csv").read_bytes()
        assert b"\r" not in raw

    def test_nonlinear_scenario(self, tmp_path):
        data = {
            "scenario": "nonlinear-fracosc",
            "grid": {"h": 0.01, "t_end": 1.0},
            "parameters": {"alpha": 1.5, "g": 1.0, "K": {"kind": "linear", "k": 1.0}},
            "initial": {"q": [1.0], "qdot": [0.0]},
            "output": {"prefix": "nl"},
        }
        cfg = write_cfg(tmp_path, data)
        assert main(["run", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
        assert (tmp_path / "nl_trajectory.csv").exists()


class TestConvergenceVerb:
    def test_table(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        code = main(
            [
                "convergence",
                "--config",
                cfg,
                "--out",
                str(tmp_path),
                "--ladder",
                "1/32,1/64,1/128",
                "--quiet",
            ]
        )
        assert code == 0
        rows = (tmp_path / "osc_convergence.csv").read_text().splitlines()
        assert rows[0] == "h,error,order"
        assert len(rows) == 4

    def test_short_ladder(self, tmp_path):
        cfg = write_cfg(tmp_path, OSC)
        assert (
            main(["convergence", "--config", cfg, "--ladder", "0.1", "--quiet"]) == 1
        )
