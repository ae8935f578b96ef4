import csv
import json

import pytest

from mmfusion.cli import CSV_COLUMNS, main
from mmfusion.config import RunConfig, parse_config, serialize_config
from mmfusion.errors import ConfigError

FAST = """
[solver]
grid_nx = 60
grid_ny = 60
num_samples = 100
"""


def write_cfg(tmp_path, extra=""):
    p = tmp_path / "run.ini"
    p.write_text(FAST + extra)
    return p


class TestConfig:
    def test_empty_is_defaults(self):
        cfg = parse_config("")
        assert cfg == RunConfig()
        assert cfg.noise.sigma_d == 1.0 and cfg.noise.kappa == 10.0
        assert cfg.solver.num_samples == 1000 and cfg.solver.epsilon == 1e-4
        assert cfg.scenario.num_trials == 1000

    def test_negative_sigma_named(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[noise]\nsigma_d = -1\n")
        assert exc.value.field == "sigma_d"
        assert "sigma_d" in str(exc.value) and "> 0" in str(exc.value)
        assert exc.value.lineno == 2

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[solver]\n\nnum_sample = 10\n")
        assert exc.value.field == "num_sample" and exc.value.lineno == 3

    def test_unknown_section(self):
        with pytest.raises(ConfigError):
            parse_config("[extras]\na = 1\n")

    def test_parse_error_has_line(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[noise]\nkappa = 4\nthis line is broken\n")
        assert exc.value.lineno == 3

    def test_bad_value_type(self):
        with pytest.raises(ConfigError) as exc:
            parse_config("[solver]\nmax_iters = many\n")
        assert exc.value.field == "max_iters"

    def test_round_trip(self):
        text = "[noise]\nkappa = 12.5\n[solver]\nepsilon = 3e-06\n[scenario]\nsubsets = 1,2; 2,3\nbias_fixed = yes\n"
        cfg = parse_config(text)
        again = parse_config(serialize_config(cfg))
        assert again == cfg
        assert again.noise.kappa == 12.5 and again.solver.epsilon == 3e-6
        assert again.scenario.subsets == [[1, 2], [2, 3]]

    def test_cross_field_checks(self):
        with pytest.raises(ConfigError):
            parse_config("[scenario]\nsubsets = 1,4\n")
        with pytest.raises(ConfigError):
            parse_config("[scenario]\nbias_lo = 3\nbias_hi = 2\n")
        with pytest.raises(ConfigError):
            parse_config("[solver]\nnum_samples = 5\n")


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestCommands:
    def test_compare(self, tmp_path):
        out = tmp_path / "out"
        rc = main(["compare", "--config", str(write_cfg(tmp_path)), "--trials", "10", "--seed", "4", "--out", str(out)])
        assert rc == 0
        rows = read_rows(out / "trials.csv")
        assert tuple(rows[0]) == CSV_COLUMNS
        for m in ("OW-hybrid", "EW-hybrid"):
            assert sum(r["method"] == m for r in rows) == 10
        summary = json.loads((out / "summary.json").read_text())
        assert summary["num_trials"] == 10 and summary["master_seed"] == 4
        for m in ("OW-hybrid", "EW-hybrid"):
            assert {"p50", "p80", "p90", "mean"} <= set(summary["methods"][m])
            assert summary["methods"][m]["p50"] <= summary["methods"][m]["p90"]

    def test_reproducible_bytes(self, tmp_path):
        cfg = write_cfg(tmp_path, "[scenario]\nbias_mode = biased\n")
        for name in ("a", "b"):
            assert main(["compare", "--config", str(cfg), "--trials", "5", "--out", str(tmp_path / name)]) == 0
        assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()
        assert (tmp_path / "a" / "summary.json").read_bytes() == (tmp_path / "b" / "summary.json").read_bytes()

    def test_threads_do_not_change_output(self, tmp_path):
        cfg = write_cfg(tmp_path)
        main(["compare", "--config", str(cfg), "--trials", "6", "--out", str(tmp_path / "a")])
        main(["compare", "--config", str(cfg), "--trials", "6", "--threads", "3", "--out", str(tmp_path / "b")])
        assert (tmp_path / "a" / "trials.csv").read_bytes() == (tmp_path / "b" / "trials.csv").read_bytes()

    def test_sweep_samples(self, tmp_path):
        cfg = write_cfg(tmp_path, "[scenario]\nsamplers = importance, uniform\n")
        out = tmp_path / "s"
        assert main(["sweep-samples", "--config", str(cfg), "--trials", "3", "--out", str(out)]) == 0
        curve = json.loads((out / "curve.json").read_text())
        assert curve["sample_counts"] == [50, 100, 200, 500, 1000]
        assert set(curve["curves"]) == {"importance", "uniform"}
        assert all(len(v) == 5 for v in curve["curves"].values())

    def test_sweep_bs(self, tmp_path):
        out = tmp_path / "b"
        assert main(["sweep-bs", "--config", str(write_cfg(tmp_path)), "--trials", "3", "--out", str(out), "--format", "json"]) == 0
        curve = json.loads((out / "curve.json").read_text())
        assert len(curve["medians"]) == 4
        assert not (out / "trials.csv").exists()

    def test_validate_config(self, tmp_path, capsys):
        assert main(["validate-config", "--config", str(write_cfg(tmp_path))]) == 0
        printed = capsys.readouterr().out
        assert "grid_nx = 60" in printed
        assert parse_config(printed).solver.grid_nx == 60

    def test_invalid_config_exit_code(self, tmp_path, capsys):
        bad = tmp_path / "bad.ini"
        bad.write_text("[noise]\nsigma_d = -1\n")
        assert main(["compare", "--config", str(bad)]) == 2
        assert "sigma_d" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert main(["compare", "--config", str(tmp_path / "nope.ini")]) == 3
