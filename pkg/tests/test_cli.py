"""Tests for the command-line interface."""

import csv
import json
import math

import numpy as np
import pytest

from sdnse import cli
from sdnse.sdspace import SampledField, write_field_csv

BASE_TOML = """
[run]
nu = 0.1
N = 8
dt = 0.05
T = 0.2
seed = 3
checkpoint_every = 2
sd_K = 0
initial = "taylor-green"
amplitude = 0.4
"""


def _write(path, text):
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------------------
# dispatch and exit codes
# ---------------------------------------------------------------------------

def test_unknown_subcommand_exits_1(capsys):
    assert cli.dispatch(["frobnicate"]) == 1
    assert "error" in capsys.readouterr().err


def test_missing_required_argument_exits_1(capsys):
    assert cli.dispatch(["sdnorm"]) == 1


def test_missing_config_exits_1(tmp_path, capsys):
    rc = cli.dispatch(["nse", "run", "--config",
                       str(tmp_path / "absent.toml"),
                       "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "not found" in capsys.readouterr().err


def test_malformed_config_exits_1(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.toml", "[run\nnu = ")
    rc = cli.dispatch(["nse", "run", "--config", cfg,
                       "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "malformed" in capsys.readouterr().err


def test_invalid_solver_values_exit_1(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.toml", "[run]\ndt = -1.0\n")
    rc = cli.dispatch(["nse", "run", "--config", cfg,
                       "--out", str(tmp_path / "o")])
    assert rc == 1


def test_threads_env_not_integer(monkeypatch):
    monkeypatch.setenv("SDNSE_THREADS", "many")

    class A:
        threads = None

    with pytest.raises(cli.UsageError):
        cli._threads(A())
    monkeypatch.setenv("SDNSE_THREADS", "4")
    assert cli._threads(A()) == 4


# ---------------------------------------------------------------------------
# testfns dump
# ---------------------------------------------------------------------------

def test_testfns_dump_csv(tmp_path):
    out = tmp_path / "xi.csv"
    rc = cli.dispatch(["testfns", "dump", "--cube", "1",
                       "--grid", "51", "--out", str(out)])
    assert rc == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["x", "re_xi", "im_xi"]
    assert len(rows) == 52
    vals = np.array([[float(v) for v in r] for r in rows[1:]])
    assert np.all(np.isfinite(vals))
    # endpoints of the dump straddle the factor support, so values vanish
    assert vals[0, 1] == 0.0 and vals[-1, 1] == 0.0


def test_testfns_level_mismatch_exits_1(tmp_path, capsys):
    rc = cli.dispatch(["testfns", "dump", "--cube", "1", "--level", "3",
                       "--out", str(tmp_path / "x.csv")])
    assert rc == 1
    assert "level" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sdnorm
# ---------------------------------------------------------------------------

def _field_csv(tmp_path, values):
    f = SampledField(values, [-1.5], [3.0 / (values.shape[1] - 1)])
    path = tmp_path / "field.csv"
    write_field_csv(f, path)
    return str(path)


def test_sdnorm_zero_field(tmp_path, capsys):
    path = _field_csv(tmp_path, np.zeros((1, 101)))
    rc = cli.dispatch(["sdnorm", "--input", path, "--K", "20"])
    assert rc == 0
    report = json.loads(capsys.readouterr().out)
    assert report["value"] == 0.0
    assert report["K"] == 20
    assert report["tail_bound"] == 0.0


def test_sdnorm_json_schema_and_out_file(tmp_path):
    x = np.linspace(-1.5, 1.5, 201)
    path = _field_csv(tmp_path, np.exp(-x**2)[None])
    out = tmp_path / "norm.json"
    rc = cli.dispatch(["sdnorm", "--input", path, "--K", "30",
                       "--p", "inf", "--out", str(out)])
    assert rc == 0
    report = json.loads(out.read_text())
    assert set(report) == {"value", "K", "tail_bound", "warnings"}
    assert report["value"] > 0


def test_sdnorm_missing_input_exits_1(tmp_path, capsys):
    rc = cli.dispatch(["sdnorm", "--input", str(tmp_path / "nope.csv")])
    assert rc == 1


# ---------------------------------------------------------------------------
# nse run
# ---------------------------------------------------------------------------

def test_nse_run_outputs_and_determinism(tmp_path):
    cfg = _write(tmp_path / "run.toml", BASE_TOML)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert cli.dispatch(["nse", "run", "--config", cfg,
                         "--out", str(out1)]) == 0
    assert cli.dispatch(["nse", "run", "--config", cfg,
                         "--out", str(out2)]) == 0
    s1 = (out1 / "series.csv").read_bytes()
    s2 = (out2 / "series.csv").read_bytes()
    assert s1 == s2  # identical config and seed give identical bytes
    rows = list(csv.DictReader((out1 / "series.csv").open()))
    assert list(rows[0]) == cli.SERIES_COLUMNS
    assert rows[0]["rho_min"] == "nan"  # homogeneous run has no density
    meta = json.loads((out1 / "run_config.json").read_text())
    assert len(meta["times"]) == len(rows)
    assert (out1 / "checkpoint_0000.csv").exists()
    manifest = json.loads((out1 / "manifest.json").read_text())
    assert manifest["subcommand"] == "nse"
    assert manifest["output_hashes"]["series.csv"] \
        == cli._sha256(out1 / "series.csv")


def test_nse_run_with_density(tmp_path):
    toml = BASE_TOML + """
[density]
enabled = true
mu = 0.1
beta = 1.0
rho_min = 0.2
rho_max = 1.0
"""
    cfg = _write(tmp_path / "dens.toml", toml)
    out = tmp_path / "dens"
    assert cli.dispatch(["nse", "run", "--config", cfg,
                         "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "series.csv").open()))
    lows = [float(r["rho_min"]) for r in rows]
    highs = [float(r["rho_max"]) for r in rows]
    assert min(lows) >= 0.2 - 1e-9
    assert max(highs) <= 1.0 + 1e-9


# ---------------------------------------------------------------------------
# monitor
# ---------------------------------------------------------------------------

def _run(tmp_path, toml, name):
    cfg = _write(tmp_path / f"{name}.toml", toml)
    out = tmp_path / name
    assert cli.dispatch(["nse", "run", "--config", cfg,
                         "--out", str(out)]) == 0
    return out


def test_monitor_unforced_run(tmp_path, capsys):
    out = _run(tmp_path, BASE_TOML, "run")
    rep = tmp_path / "monitor.json"
    rc = cli.dispatch(["monitor", "--trajectory", str(out),
                       "--K", "10", "--out", str(rep)])
    assert rc == 0
    assert "annulus_ok=True" in capsys.readouterr().out
    payload = json.loads(rep.read_text())
    assert set(payload) >= {"M_hat", "gamma", "u_plus", "u_minus", "sigma",
                            "margins", "annulus_ok", "alpha_hat"}
    assert payload["gamma"] == 0.0  # no forcing


def test_monitor_strong_forcing_exits_2(tmp_path, capsys):
    toml = """
[run]
nu = 0.05
N = 8
dt = 0.01
T = 0.1
checkpoint_every = 2
sd_K = 0
initial = "taylor-green"
amplitude = 0.4

[forcing]
amplitude = 2.0
theta = 0.5
"""
    out = _run(tmp_path, toml, "forced")
    rc = cli.dispatch(["monitor", "--trajectory", str(out)])
    assert rc == 2
    assert "no real distinct roots" in capsys.readouterr().err


def test_monitor_rejects_non_trajectory_dir(tmp_path):
    rc = cli.dispatch(["monitor", "--trajectory", str(tmp_path)])
    assert rc == 1


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------

def test_pipeline_end_to_end(tmp_path):
    toml = BASE_TOML + """
[verify]
points = 1025
K = 40

[monitor]
K = 10
"""
    cfg = _write(tmp_path / "pipe.toml", toml)
    out = tmp_path / "pipe"
    rc = cli.dispatch(["pipeline", "--config", cfg, "--out", str(out)])
    assert rc == 0
    report = json.loads((out / "report.json").read_text())
    assert report["annulus_ok"] is True
    assert report["contraction"]["nonincreasing"] is True
    assert all(c["passed"] for c in report["verify"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert "report.json" in manifest["output_hashes"]
    assert "series.csv" in manifest["output_hashes"]
