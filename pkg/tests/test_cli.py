import json
from pathlib import Path

import numpy as np
import pytest

from rissim import cli
from rissim.config import ConfigError, config_hash, emit_defaults, parse_config, parse_config_text
from rissim.engine import SimConfig
from rissim.metrics import empirical_cdf

SMALL_INI = """
[layout]
rings = 0
users_per_sector = 2
[panels]
ris_horizontal = 4
ris_vertical = 4
[run]
drops = 2
"""


@pytest.fixture
def small_ini(tmp_path):
    p = tmp_path / "small.ini"
    p.write_text(SMALL_INI)
    return str(p)


def test_empty_config_gives_table_defaults():
    cfg = parse_config_text("")
    assert cfg == SimConfig()
    assert cfg.env.carrier_ghz == 2.0
    assert cfg.bandwidth_hz == 10e6
    assert cfg.tx_power_dbm == 43.0
    assert cfg.users_per_sector == 10
    assert cfg.bs_horizontal * cfg.bs_vertical == 40
    assert (cfg.ris_horizontal, cfg.ris_vertical) == (16, 16)
    assert cfg.ue_antennas == 1
    assert cfg.noise_dbm == pytest.approx(-95.0)


def test_discrete_without_levels_names_key():
    with pytest.raises(ConfigError) as exc:
        parse_config_text("[strategy]\nname = discrete\n")
    assert exc.value.key == "strategy.levels"
    assert parse_config_text("[strategy]\nname = discrete\nlevels = 4\n").levels == 4


def test_roundtrip_defaults():
    assert parse_config_text(emit_defaults()) == SimConfig()
    custom = parse_config_text(SMALL_INI + "seed = 99\n[environment]\nforce_los = true\n")
    assert parse_config_text(emit_defaults(custom)) == custom


@pytest.mark.parametrize(
    "text,key,line",
    [
        ("[layout]\nisd = fast\n", "layout.isd", 2),
        ("[run]\n\ndrops = 1.5\n", "run.drops", 3),
        ("[run]\ninterference = maybe\n", "run.interference", 2),
        ("[layout]\ncolour = red\n", "layout.colour", 2),
        ("[bogus]\nx = 1\n", "bogus", 1),
    ],
)
def test_errors_name_key_and_line(text, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.key == key and exc.value.line == line
    assert key in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        parse_config(tmp_path / "nope.ini")


def test_config_hash():
    assert config_hash(SimConfig()) == config_hash(parse_config_text(""))
    assert config_hash(SimConfig()) != config_hash(SimConfig(seed=1))


def test_theory_table(capsys):
    assert cli.main(["theory", "--levels", "1,2,4,16"]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert len(rows) == 4
    assert [r.split()[1] for r in rows] == ["0.0000", "0.6366", "0.9003", "0.9936"]


def test_csv_format(tmp_path):
    p = tmp_path / "x.csv"
    cli.write_cdf_csv(empirical_cdf([3.0, 1.0, 2.0]), p)
    data = p.read_bytes()
    assert b"\r" not in data
    assert data.decode().splitlines() == ["value,cdf", "1,0.333333333", "2,0.666666667", "3,1"]


def test_run_writes_outputs(small_ini, tmp_path):
    out = tmp_path / "o"
    code = cli.main(["run", "--config", small_ini, "--seed", "7", "--out", str(out), "--strategy", "no_ris,ideal"])
    assert code == 0
    for label in ("no_ris", "ideal"):
        for metric in cli.METRICS:
            lines = (out / label / f"{metric}.csv").read_text().splitlines()
            assert lines[0] == "value,cdf" and lines[-1].endswith(",1")
    summary = json.loads((out / "summary.json").read_text())
    assert summary["seed"] == 7 and summary["baseline"] == "no_ris"
    assert "coupling_loss" in summary["median_deltas"]["ideal"]
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 7 and len(manifest["config_hash"]) == 64


def test_run_honours_env_out(small_ini, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
    assert cli.main(["run", "--config", small_ini, "--drops", "1", "--strategy", "no_ris"]) == 0
    assert (tmp_path / "envout" / "no_ris" / "sinr.csv").exists()


def test_sweep_reports_median_deltas(small_ini, tmp_path, capsys):
    out = tmp_path / "s"
    code = cli.main(["sweep", "--config", small_ini, "--out", str(out), "--strategy", "no_ris,discrete,ideal",
                     "--levels", "2,8", "--ris-sizes", "2x2,4x4"])
    assert code == 0
    summary = json.loads((out / "summary.json").read_text())
    assert set(summary["strategies"]) == {
        f"n{n}_{s}" for n in (4, 16) for s in ("no_ris", "discrete2", "discrete8", "ideal")
    }
    assert "n16_ideal" in summary["median_deltas"]
    assert "dCL" in capsys.readouterr().out


def test_calibrate(small_ini, tmp_path):
    out = tmp_path / "c"
    assert cli.main(["calibrate", "--config", small_ini, "--out", str(out)]) == 0
    assert (out / "calibration_no_ris" / "coupling_loss.csv").exists()


def test_emit_defaults_file_roundtrip(tmp_path):
    p = tmp_path / "d.ini"
    assert cli.main(["emit-defaults", "--out", str(p)]) == 0
    assert parse_config(p) == SimConfig()


def test_exit_codes(tmp_path, small_ini):
    bad = tmp_path / "bad.ini"
    bad.write_text("[strategy]\nname = discrete\n")
    assert cli.main(["run", "--config", str(bad)]) == 2
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert cli.main(["run", "--config", small_ini, "--drops", "1", "--strategy", "no_ris",
                     "--out", str(blocker / "sub")]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["bogus"])
    assert exc.value.code == 2
