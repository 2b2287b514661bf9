import json
import math

import numpy as np
import pytest

from polarlab import cli
from polarlab.channels import make_bec, make_bsc
from polarlab.harness import (
    BlockLengthError,
    ChannelSpecError,
    ConfigError,
    EXPERIMENT_KINDS,
    UnknownExperimentError,
    bec_log_z,
    mismatched_rate_estimate,
    rows_to_csv,
    run_config,
    run_experiment,
    scaling_probe,
    scaling_slope,
    verify,
)

from test_construction import scalar_bec_z


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return p


class TestScaling:
    def test_log_z_matches_recursion(self):
        np.testing.assert_allclose(np.exp(bec_log_z(0.5, 10)), scalar_bec_z(0.5, 10), rtol=1e-12, atol=0)

    def test_log_z_no_underflow(self):
        lz = bec_log_z(0.5, 20)
        assert np.all(np.isfinite(lz))
        assert lz.min() < -1e5

    def test_zero_rate_sentinel(self):
        assert scaling_probe(0.5, 0.0, [4]) == [(4, 0.0, math.inf)]

    def test_rate_above_capacity(self):
        with pytest.raises(ValueError):
            scaling_probe(0.5, 0.5, [10])

    def test_slope(self):
        slope = scaling_slope(scaling_probe(0.5, 0.3, range(14, 21)))
        assert 0.4 <= slope <= 0.6

    def test_near_capacity_rows_emitted(self):
        rows = scaling_probe(0.5, 0.45, range(14, 21))
        assert len(rows) == 7
        # the union bound is above one for the shorter lengths
        assert all(math.isfinite(ll) == (bound < 1) for _, bound, ll in rows)


class TestMismatchedRate:
    def test_matched_bec_against_exact(self):
        n, target, trials = 8, 1e-2, 20000
        r = mismatched_rate_estimate(make_bec(0.5), make_bec(0.5), n, target, trials, seed=4)
        # the SC genie errs on an erasure half the time
        exact = np.cumsum(np.sort(scalar_bec_z(0.5, n) / 2))
        K = int(np.searchsorted(exact, target, side="right"))
        assert abs(r.K - K) <= max(2, 3 * r.rate_se * (1 << n))

    def test_useless_metric(self):
        r = mismatched_rate_estimate(make_bsc(0.11), make_bsc(0.5), 6, 1e-2, 500, seed=0)
        assert r.K == 0 and r.rate == 0.0


class TestRunConfig:
    def test_polarization(self):
        cols, rows, seed = run_config({"kind": "polarization", "channel": {"type": "bec", "eps": 0.5}, "n": 20})
        assert len(rows) == 21
        assert abs(rows[-1][1] - 0.5) <= 0.05
        assert all(r[4] == pytest.approx(0.5, abs=1e-9) for r in rows)

    def test_empty_k_list(self, tmp_path):
        cfg = write(tmp_path, {"kind": "bler_sweep", "channel": {"type": "bsc", "p": 0.11}, "n": 6, "K": []})
        assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == 0
        text = (tmp_path / "o" / "bler_sweep.csv").read_text()
        assert text == "K,trials,errors,bler,se\n"

    def test_manifest(self, tmp_path):
        cfg = write(tmp_path, {"kind": "bler_sweep", "channel": {"type": "bsc", "p": 0.11}, "n": 6,
                               "K": [10, 20], "trials": 300})
        m = run_experiment(cfg, tmp_path / "o", seed=5)
        csv_lines = (tmp_path / "o" / "bler_sweep.csv").read_text().strip().split("\n")
        on_disk = json.loads((tmp_path / "o" / "manifest.json").read_text())
        assert m["rows"] == on_disk["rows"] == len(csv_lines) - 1 == 2
        assert on_disk["seed"] == 5
        assert set(on_disk["versions"]) >= {"numpy", "scipy", "python"}

    @pytest.mark.parametrize("cfg", [
        {"kind": "bler_sweep", "channel": {"type": "bsc", "p": 0.11}, "n": 7, "K": [30, 60], "trials": 600},
        {"kind": "bler_sweep", "pattern": [{"type": "bec", "eps": 0.2}, {"type": "bec", "eps": 0.8}],
         "n": 6, "K": [20], "trials": 400, "construction": "genie", "design_trials": 400},
        {"kind": "mismatched_rate", "channel": {"type": "bsc", "p": 0.11}, "metric": {"type": "bsc", "p": 0.08},
         "n_list": [6], "trials": 400},
        {"kind": "glrt", "channel": {"type": "bsc", "p": 0.11}, "n": 6, "K": 16, "trials": 300,
         "class": [{"type": "bsc", "p": 0.05}, {"type": "bsc", "p": 0.11}]},
    ])
    def test_thread_count_does_not_matter(self, cfg):
        a = rows_to_csv(*run_config(cfg, seed=3, threads=1)[:2])
        b = rows_to_csv(*run_config(cfg, seed=3, threads=4)[:2])
        assert a == b
        c = rows_to_csv(*run_config(cfg, seed=4, threads=1)[:2])
        assert c.split("\n")[0] == a.split("\n")[0]

    def test_every_kind_runs(self):
        configs = {
            "polarization": {"channel": {"type": "bsc", "p": 0.11}, "n": 4},
            "bler_sweep": {"channel": {"type": "bec", "eps": 0.5}, "n": 5, "K": [8], "trials": 100},
            "scaling": {"eps": 0.5, "rate": 0.3, "n_list": [10, 12]},
            "mismatched_rate": {"channel": {"type": "bsc", "p": 0.11}, "metric": {"type": "bsc", "p": 0.08},
                                "n_list": [5], "trials": 200},
            "e0_scan": {"channel": {"w0": [0.6, 0.3, 0.1], "w1": [0.2, 0.3, 0.5]}, "rho0": [1.0]},
            "order_probe": {"w1": {"type": "bsc", "p": 0.11}, "w2": {"type": "bsc", "p": 0.08},
                            "n": 5, "K": 8, "trials": 100},
            "glrt": {"channel": {"type": "bsc", "p": 0.11}, "n": 5, "K": 8, "trials": 100,
                     "class": [{"type": "bsc", "p": 0.11}]},
            "construct": {"channel": {"type": "bawgn", "snr": 1.0, "bins": 8}, "N": 16},
        }
        assert set(configs) == set(EXPERIMENT_KINDS)
        for kind, cfg in configs.items():
            cols, rows, _ = run_config(dict(cfg, kind=kind))
            assert rows and all(len(r) == len(cols) for r in rows)


class TestErrors:
    @pytest.mark.parametrize("cfg, exc, code", [
        ({"kind": "nope"}, UnknownExperimentError, 4),
        ({"kind": "polarization", "channel": {"type": "bsc", "p": 0.7}, "n": 3}, ChannelSpecError, 5),
        ({"kind": "construct", "channel": {"type": "bsc", "p": 0.1}, "N": 1000}, BlockLengthError, 6),
        ({"kind": "scaling", "eps": 0.5, "rate": 0.9}, ConfigError, 3),
        ({"kind": "glrt", "channel": {"type": "bsc", "p": 0.1}, "n": 3}, ConfigError, 3),
    ])
    def test_exit_codes(self, tmp_path, cfg, exc, code, capsys):
        with pytest.raises(exc):
            run_config(cfg)
        assert cli.main(["run", str(write(tmp_path, cfg)), "--out", str(tmp_path)]) == code
        assert exc.__name__ in capsys.readouterr().err

    def test_unreadable_config(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert cli.main(["run", str(p)]) == 3

    def test_usage_error(self):
        with pytest.raises(SystemExit) as e:
            cli.main(["frobnicate"])
        assert e.value.code == 2


class TestCLI:
    def test_channels_list(self, capsys):
        assert cli.main(["channels", "list"]) == 0
        out = capsys.readouterr().out
        for fam in ("bsc", "bec", "bawgn"):
            assert fam in out
        assert "polarization" in out

    def test_verify(self, capsys):
        assert cli.main(["verify"]) == 0
        out = capsys.readouterr().out
        assert "FAIL" not in out and out.count("PASS") == len(verify())
