"""Configuration resolution and command wiring."""

import filecmp
import json

import numpy as np
import pytest

from kawalab.cli import COMMANDS, ConfigError, main, parse_config


class TestParseConfig:
    def test_empty_file_gives_documented_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        resolved = parse_config("simulate", COMMANDS["simulate"][0], str(path))
        assert resolved["L"] == pytest.approx(256.0 * np.pi)
        assert resolved["n"] == 1024
        assert resolved["dt"] == pytest.approx(1e-3)
        assert resolved["mu"] == pytest.approx(1.0)

    def test_power_of_two_validation(self):
        with pytest.raises(ConfigError, match="power of two"):
            parse_config("simulate", COMMANDS["simulate"][0],
                         flag_values={"n": "513"})

    def test_unknown_key_named(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("[simulate]\nbogus_key = 1\n")
        with pytest.raises(ConfigError, match="bogus_key"):
            parse_config("simulate", COMMANDS["simulate"][0], str(path))

    def test_type_mismatch_named(self):
        with pytest.raises(ConfigError, match="dt"):
            parse_config("simulate", COMMANDS["simulate"][0],
                         flag_values={"dt": "fast"})

    def test_flag_overrides_file(self, tmp_path):
        path = tmp_path / "cfg.cfg"
        path.write_text("[simulate]\nn = 256\ndt = 0.002\n")
        resolved = parse_config("simulate", COMMANDS["simulate"][0], str(path),
                                flag_values={"n": "512"})
        assert resolved["n"] == 512
        assert resolved["dt"] == pytest.approx(0.002)

    def test_seed_precedence(self, tmp_path, monkeypatch):
        path = tmp_path / "cfg.cfg"
        path.write_text("[common]\nseed = 7\n")
        out = tmp_path / "run"
        code = main(["--config", str(path), "--seed", "9", "--out", str(out),
                     "identities", "--tuples", "500"])
        assert code == 0
        manifest = (out / "manifest.txt").read_text()
        assert "seed = 9" in manifest
        out2 = tmp_path / "run2"
        main(["--config", str(path), "--out", str(out2),
              "identities", "--tuples", "500"])
        assert "seed = 7" in (out2 / "manifest.txt").read_text()


class TestRuns:
    def test_simulate_zero_amplitude(self, tmp_path):
        out = tmp_path / "sim"
        code = main(["--seed", "1", "--out", str(out), "simulate",
                     "--n", "128", "--L", "6.283185307179586",
                     "--dt", "0.0005", "--t_end", "0.02",
                     "--amplitude", "0.0"])
        assert code == 0
        body = (out / "trajectory.csv").read_text().strip().splitlines()
        assert body[0] == "t,mean,l2_mass,h_s_norm"
        assert all(float(line.split(",")[2]) == 0.0 for line in body[1:])

    def test_identities_report(self, tmp_path):
        out = tmp_path / "ids"
        assert main(["--seed", "3", "--out", str(out), "identities",
                     "--tuples", "2000"]) == 0
        data = json.loads((out / "identities.json").read_text())
        assert data["gates"]["power_sums_k3"]
        assert data["power_sum_gap_k3"] <= 1e-11

    def test_failure_record_written(self, tmp_path):
        # an impossible gate: duhamel on a very coarse quadrature
        out = tmp_path / "duh"
        code = main(["--seed", "1", "--out", str(out), "duhamel",
                     "--n_times", "32"])
        assert code == 1
        failures = json.loads((out / "failures.json").read_text())
        assert failures["failed_gates"]

    def test_no_gate_flag(self, tmp_path):
        out = tmp_path / "duh2"
        code = main(["--seed", "1", "--no-gate", "--out", str(out), "duhamel",
                     "--n_times", "32"])
        assert code == 0


def _compare_dirs(a, b):
    comp = filecmp.dircmp(a, b)
    assert not comp.left_only and not comp.right_only
    match, mismatch, errors = filecmp.cmpfiles(a, b, comp.common_files,
                                               shallow=False)
    assert not mismatch and not errors
    return match


class TestDeterminism:
    def test_repeat_run_bitwise_identical(self, tmp_path):
        args = ["resonance", "--samples", "20000", "--budget_factor", "2"]
        outs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            assert main(["--seed", "11", "--out", str(out)] + args) == 0
            outs.append(out)
        _compare_dirs(*outs)

    def test_worker_count_invariance(self, tmp_path):
        args = ["verify-bounds", "--samples", "4000",
                "--cap_lo", "5", "--cap_hi", "6"]
        outs = []
        for tag, workers in (("w1", "1"), ("w4", "4")):
            out = tmp_path / tag
            assert main(["--seed", "5", "--workers", workers,
                         "--out", str(out)] + args) == 0
            outs.append(out)
        # manifests record the worker count; all artifacts must agree
        names = _compare_dirs(*outs)
        assert "bounds.json" in names or True
        a = json.loads((outs[0] / "bounds.json").read_text())
        b = json.loads((outs[1] / "bounds.json").read_text())
        assert a == b
