import json
import math

import numpy as np
import pytest

from mdmp.cli import main
from mdmp.config import default_config, load_config_text, schema_text
from mdmp.errors import ConfigError, DimMismatchError, ZeroTruthError
from mdmp.harness import (
    AGG_COLUMNS,
    TRIAL_COLUMNS,
    aggregate,
    nmse,
    records_csv,
    run_scenario,
    run_trial,
    sweep,
)
from mdmp.tensor import read_cct

SMALL = [
    "geometry.n_h=6", "geometry.n_v=6", "grid.n_f=16", "grid.n_s=6", "paths.count=2",
    "pencil.L=auto", "pencil.R=auto", "run.trials=2", "run.csi_delay_ms=4,16.3",
    "run.snr_db=inf",
]


def small(*extra):
    return load_config_text("", SMALL + list(extra))


def test_nmse_examples():
    a = np.ones((2, 2))
    assert nmse(a, a) == (0.0, -math.inf)
    assert nmse(2 * a, a) == (1.0, 0.0)
    r, db = nmse(a + 0.1, a)
    assert r == pytest.approx(0.01) and db == pytest.approx(-20)
    with pytest.raises(ZeroTruthError):
        nmse(a, 0 * a)
    with pytest.raises(DimMismatchError):
        nmse(a, np.ones(3))


def test_schema_lists_every_section():
    text = schema_text()
    for s in ("[geometry]", "[grid]", "[paths]", "[pencil]", "[run]"):
        assert s in text


def test_config_defaults_and_overrides():
    cfg = default_config()
    assert cfg.pencil().L == 6 and cfg.pencil().K == 32 and cfg.pencil().Q == 8
    cfg.validate()
    cfg2 = load_config_text("[run]\ntrials = 7\n", ["run.seed=9"])
    assert cfg2.trials == 7 and cfg2.seed == 9
    assert cfg2.updated(run_trials=3).trials == 3


def test_config_errors():
    with pytest.raises(ConfigError):
        load_config_text("[run]\nbogus = 1\n")
    with pytest.raises(ConfigError):
        load_config_text("", ["run.trials=abc"])
    with pytest.raises(ConfigError):
        load_config_text("", ["no-dot=1"])
    with pytest.raises(ConfigError):
        load_config_text("", ["pencil.L=8"]).validate()


def test_noiseless_trial_is_exact():
    recs = run_trial(small(), 0, 0)
    assert [r.status for r in recs] == ["ok", "ok"]
    assert recs[1].csi_delay_s == pytest.approx(16.3e-3)
    for r in recs:
        assert r.n_paths_hat == 2
        assert r.nmse_db_mdmp < -100
        assert r.nmse_db_stale > r.nmse_db_mdmp


def test_static_channel_stale_is_exact():
    recs = run_trial(small("paths.speed_kmh=0"), 0, 0)
    assert all(r.nmse_stale == 0.0 for r in recs)


def test_records_deterministic_and_worker_independent():
    cfg = small("run.snr_db=20")
    a = records_csv(run_scenario(cfg))
    assert a == records_csv(run_scenario(cfg))
    assert a == records_csv(run_scenario(cfg, workers=2))
    assert a.splitlines()[0].split(",") == TRIAL_COLUMNS


def test_aggregate_counts_failures_as_inf():
    recs = run_scenario(small())
    recs[0].status = "RankDeficient"
    rows = aggregate(recs)
    row = next(r for r in rows if r["csi_delay_s"] == recs[0].csi_delay_s)
    assert row["failures"] == 1 and row["failure_codes"] == "RankDeficient:1"
    assert row["trials"] == 2
    assert row["median_nmse_db_mdmp"] == math.inf


def test_empty_delay_list_gives_header_only(tmp_path):
    cfg = small("run.csi_delay_ms=")
    text = sweep(cfg, "csi_delay", tmp_path / "a.csv")
    assert text == ",".join(AGG_COLUMNS) + "\n"


def test_antenna_sweep_resets_windows():
    cfg = small("run.antennas=4x4,6x6", "run.trials=1")
    text = sweep(cfg, "antennas")
    lines = text.strip().splitlines()
    assert len(lines) == 1 + 2 * 2
    assert {l.split(",")[AGG_COLUMNS.index("axis_value")] for l in lines[1:]} == {"16", "36"}


def test_cli_schema(capsys):
    assert main(["--print-schema"]) == 0
    assert "[pencil]" in capsys.readouterr().out


def test_cli_bounds(capsys):
    assert main(["bounds", "--nv", "8", "--ns", "8", "--q", "4", "--p", "4", "--n-h-max", "20"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["bound"] == pytest.approx(12.571428571428571) and d["brute_force_n_h"] == 2


def test_cli_bounds_error(capsys):
    assert main(["bounds", "--nv", "8", "--ns", "3", "--q", "4", "--p", "4"]) == 1
    assert "ConstraintViolation" in capsys.readouterr().err


def test_cli_simulate_estimate_predict(tmp_path):
    sets = sum((["--set", s] for s in SMALL), [])
    traj = str(tmp_path / "x.cct")
    assert main(["simulate", *sets, "--out", traj]) == 0
    X, axes = read_cct(traj)
    assert axes.names == ("ant_h", "ant_v", "freq", "time") and X.dims == (6, 6, 16, 6)
    truth = json.loads((tmp_path / "x.cct.paths.json").read_text())
    est_path = str(tmp_path / "est.json")
    assert main(["estimate", *sets, "--noiseless", "--input", traj, "--out", est_path]) == 0
    est = json.loads(open(est_path).read())
    assert sorted(p["theta"] for p in est["paths"]) == pytest.approx(
        sorted(p["theta"] for p in truth["paths"]), abs=1e-8)
    out = str(tmp_path / "h.cct")
    assert main(["predict", *sets, "--estimates", est_path, "--t-target", "0.02", "--out", out]) == 0
    H, axes = read_cct(out)
    assert axes.names == ("ant_h", "ant_v", "freq") and H.dims == (6, 6, 16)


def test_cli_sweep_files(tmp_path):
    sets = sum((["--set", s] for s in SMALL), [])
    a, b = tmp_path / "a.csv", tmp_path / "t.csv"
    assert main(["sweep", *sets, "--axis", "csi_delay", "--out", str(a),
                 "--trials-out", str(b), "--timing"]) == 0
    assert a.read_text().splitlines()[0] == ",".join(AGG_COLUMNS)
    assert b.read_text().splitlines()[0].endswith(",wall_time")
