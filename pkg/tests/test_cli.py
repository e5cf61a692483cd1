import json
import math

import numpy as np
import pytest

from fracharm.cli import cli_main

STAR = {
    "experiment": "star-sum",
    "gamma": 0.5,
    "p": 1.0,
    "corpus": {"seed": 3, "count": 4},
    "sweep": {"k_min": -1, "k_max": 1},
}


def write_config(tmp_path, payload, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


class TestVerify:
    def test_pass_writes_files_and_exits_zero(self, tmp_path, capsys):
        cfg = write_config(tmp_path, STAR)
        out = tmp_path / "out"
        code = cli_main(["verify", "star-sum", "--config", cfg,
                         "--out", str(out)])
        assert code == 0
        assert (out / "star-sum.report.json").exists()
        assert (out / "star-sum.trials.csv").exists()
        stdout = capsys.readouterr().out
        assert "star-sum: PASS" in stdout
        report = json.loads((out / "star-sum.report.json").read_text())
        assert report["passed"] is True and report["kind"] == "ratio"

    def test_csv_shape(self, tmp_path):
        cfg = write_config(tmp_path, STAR)
        cli_main(["verify", "star-sum", "--config", cfg, "--out",
                  str(tmp_path)])
        lines = (tmp_path / "star-sum.trials.csv").read_text().splitlines()
        assert lines[0] == "trial,scale_k,lhs,rhs,ratio"
        assert len(lines) == 1 + 4 * 3  # 4 trials, sweep of 3
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "-1"
        assert float(first[4]) == float(first[2]) / float(first[3])

    def test_repeat_runs_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, STAR)
        a, b = tmp_path / "a", tmp_path / "b"
        assert cli_main(["verify", "star-sum", "--config", cfg,
                         "--out", str(a)]) == 0
        assert cli_main(["verify", "star-sum", "--config", cfg,
                         "--out", str(b)]) == 0
        assert ((a / "star-sum.trials.csv").read_bytes()
                == (b / "star-sum.trials.csv").read_bytes())

    def test_seed_override_changes_trials(self, tmp_path):
        cfg = write_config(tmp_path, STAR)
        a, b = tmp_path / "a", tmp_path / "b"
        cli_main(["verify", "star-sum", "--config", cfg, "--out", str(a)])
        cli_main(["verify", "star-sum", "--config", cfg, "--seed", "99",
                  "--out", str(b)])
        assert ((a / "star-sum.trials.csv").read_bytes()
                != (b / "star-sum.trials.csv").read_bytes())

    def test_failing_gate_exits_one(self, tmp_path, capsys):
        # variable exponents are not dilation-homogeneous; an absurdly tight
        # slope gate turns the small measured trend into a FAIL verdict
        payload = {
            "experiment": "var-frac-hardy", "m": 2, "gamma": 0.5,
            "exponents": [{"kind": "log-decay", "limit": 1.2,
                           "amplitude": 0.3}] * 2,
            "grid": {"box": [[-2, 2]], "h": 0.03125},
            "corpus": {"seed": 5, "count": 3, "side_exponents": [-3, -1]},
            "tolerances": {"slope_tol": 1e-9},
        }
        cfg = write_config(tmp_path, payload)
        code = cli_main(["verify", "var-frac-hardy", "--config", cfg,
                         "--out", str(tmp_path)])
        assert code == 1
        assert "FAIL" in capsys.readouterr().out
        report = json.loads((tmp_path / "var-frac-hardy.report.json")
                            .read_text())
        assert report["passed"] is False

    def test_unknown_experiment_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, STAR)
        assert cli_main(["verify", "mystery", "--config", cfg]) == 2
        assert "unknown experiment" in capsys.readouterr().err

    def test_config_experiment_mismatch_exits_two(self, tmp_path, capsys):
        cfg = write_config(tmp_path, STAR)
        assert cli_main(["verify", "annuli", "--config", cfg]) == 2
        assert "star-sum" in capsys.readouterr().err

    def test_malformed_json_reports_position(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text('{\n  "experiment": "star-sum",\n}\n')
        assert cli_main(["verify", "star-sum", "--config", str(path)]) == 2
        assert "3:1" in capsys.readouterr().err

    def test_hypothesis_rejection_exits_two(self, tmp_path, capsys):
        payload = dict(STAR, experiment="tail-sum", epsilon=1.2, r=1.5)
        cfg = write_config(tmp_path, payload)
        assert cli_main(["verify", "tail-sum", "--config", cfg]) == 2
        assert "epsilon" in capsys.readouterr().err

    def test_chain_report_summary(self, tmp_path, capsys):
        payload = {
            "experiment": "extrapolation", "m": 2, "gamma": 0.25,
            "exponents": [4.0, 4.0],
            "grid": {"box": [[-8, 8]], "h": 0.03125},
            "corpus": {"seed": 7, "count": 1, "atoms_per_trial": [2, 2]},
        }
        cfg = write_config(tmp_path, payload)
        assert cli_main(["verify", "extrapolation", "--config", cfg,
                         "--out", str(tmp_path)]) == 0
        assert "final=" in capsys.readouterr().out
        report = json.loads((tmp_path / "extrapolation.report.json")
                            .read_text())
        assert report["kind"] == "chain" and report["passed"] is True


class TestNorm:
    def samples(self, tmp_path, values):
        path = tmp_path / "f.csv"
        path.write_text("\n".join(repr(float(v)) for v in values) + "\n")
        return str(path)

    def test_constant_exponent_matches_quadrature(self, tmp_path, capsys):
        vals = [1.0, 2.0, 2.0, 1.0]
        path = self.samples(tmp_path, vals)
        assert cli_main(["norm", path, "--p", "2.0", "--h", "0.25"]) == 0
        printed = float(capsys.readouterr().out)
        expect = math.sqrt(sum(v * v for v in vals) * 0.25)
        assert printed == pytest.approx(expect, rel=1e-12)

    def test_variable_exponent_norm(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        path = self.samples(tmp_path, rng.uniform(0.0, 2.0, size=64))
        assert cli_main(["norm", path, "--p-limit", "1.5",
                         "--p-amplitude", "0.5", "--h", "0.25",
                         "--lo", "-8.0"]) == 0
        assert float(capsys.readouterr().out) > 0

    def test_power_weight(self, tmp_path, capsys):
        path = self.samples(tmp_path, [1.0] * 8)
        assert cli_main(["norm", path, "--p", "1.0", "--h", "1.0",
                         "--lo", "0.0", "--power-weight", "1.0"]) == 0
        # integral of x over [0,8] at cell centers: sum (i+1/2) = 32
        assert float(capsys.readouterr().out) == pytest.approx(32.0)

    def test_exponent_flags_are_exclusive(self, tmp_path, capsys):
        path = self.samples(tmp_path, [1.0])
        assert cli_main(["norm", path, "--p", "2.0", "--p-limit", "1.5",
                         "--p-amplitude", "0.2"]) == 2
        assert cli_main(["norm", path]) == 2

    def test_missing_file(self, tmp_path):
        assert cli_main(["norm", str(tmp_path / "nope.csv"), "--p", "2"]) == 2


class TestWeightConst:
    def test_stable_power_weight(self, capsys):
        code = cli_main(["weight-const", "--kind", "power", "--exponent",
                         "0.25", "--ap", "2.0", "--rh", "2.0"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["ap"]["stable"] and payload["rh"]["stable"]
        assert payload["ap"]["constant"] >= 1.0

    def test_unstable_exits_one(self, capsys):
        code = cli_main(["weight-const", "--kind", "power", "--exponent",
                         "-0.3", "--rh", "4.0"])
        assert code == 1
        assert not json.loads(capsys.readouterr().out)["rh"]["stable"]

    def test_offdiagonal_constant(self, capsys):
        code = cli_main(["weight-const", "--kind", "power", "--exponent",
                         "0.125", "--apq", "1.3333333333333333", "4.0"])
        assert code == 0
        assert json.loads(capsys.readouterr().out)["apq"]["constant"] > 0

    def test_no_request_exits_two(self, capsys):
        assert cli_main(["weight-const", "--kind", "constant"]) == 2

    def test_invalid_order_exits_two(self, capsys):
        assert cli_main(["weight-const", "--ap", "1.0"]) == 2


class TestKernelCheck:
    def test_model_kernel_constants(self, capsys):
        code = cli_main(["kernel-check", "--m", "2", "--n", "1",
                         "--gamma", "0.5", "--samples", "100"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["size_constant"] == pytest.approx(1.0, rel=1e-6)
        assert payload["smoothness_constant"] > 0

    def test_bad_gamma_exits_two(self, capsys):
        assert cli_main(["kernel-check", "--m", "1", "--n", "1",
                         "--gamma", "1.5"]) == 2


class TestMisc:
    def test_list_names_every_experiment(self, capsys):
        assert cli_main(["list"]) == 0
        out = capsys.readouterr().out
        for name in ("star-sum", "tail-sum", "annuli", "fefferman-stein",
                     "frac-hardy", "bounded-slots", "var-frac-hardy",
                     "extrapolation"):
            assert name in out

    def test_usage_error_exits_two(self, capsys):
        assert cli_main([]) == 2
        assert cli_main(["verify"]) == 2
