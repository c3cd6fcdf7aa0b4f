"""Monte-Carlo runs: generate, estimate, predict, score, write CSV.

Each trial owns its random streams, derived from (seed, trial) for the paths
and (seed, trial, 1, snr index) for the noise, so results do not depend on the
worker count or execution order.
"""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import ScenarioConfig
from .errors import DimMismatchError, MDMPError, ZeroTruthError
from .predict import predict_channel, run_mdmp, stale_csi_baseline
from .synth import add_awgn, channel_snapshot, channel_trajectory, check_windows, draw_paths
from .tensor import as_array

AXES = ("snr", "csi_delay", "antennas", "samples")


def nmse(est, truth):
    """Return (ratio, dB) of ||est - truth||^2 / ||truth||^2; dB is -inf for ratio 0."""
    a, b = as_array(est), as_array(truth)
    if a.shape != b.shape:
        raise DimMismatchError(f"shapes {a.shape} and {b.shape} differ")
    den = float(np.vdot(b, b).real)
    if den == 0.0:
        raise ZeroTruthError("reference channel is all zero")
    d = a - b
    ratio = float(np.vdot(d, d).real) / den
    return ratio, (10.0 * math.log10(ratio) if ratio > 0 else -math.inf)


@dataclass
class MetricsRecord:
    scenario: str
    axis: str
    axis_value: float
    trial: int
    snr_db: float
    csi_delay_s: float
    n_h: int
    n_v: int
    n_t: int
    n_f: int
    n_s: int
    n_paths: int
    n_paths_hat: int
    status: str
    nmse_mdmp: float
    nmse_db_mdmp: float
    nmse_stale: float
    nmse_db_stale: float
    err_theta: float
    err_phi: float
    err_tau: float
    err_omega: float
    offdiag_freq: float
    offdiag_time: float
    gap_freq: float
    pairing_cost: float
    wall_time: float = 0.0


TRIAL_COLUMNS = [f.name for f in fields(MetricsRecord) if f.name != "wall_time"]
AGG_COLUMNS = [
    "scenario", "axis", "axis_value", "snr_db", "csi_delay_s", "n_t", "n_s", "n_paths",
    "trials", "failures", "failure_codes",
    "nmse_db_mdmp", "nmse_db_stale", "median_nmse_db_mdmp", "median_nmse_db_stale",
    "median_err_theta", "median_err_phi", "median_err_tau", "median_err_omega",
    "median_offdiag_freq",
]

_NAN = float("nan")


def _param_errors(est, paths):
    """Median absolute errors after angle-based matching to the truth."""
    th = np.array([p.theta for p in paths])
    ph = np.array([p.phi for p in paths])
    C = np.abs(np.subtract.outer(est.theta, th)) + np.abs(np.subtract.outer(est.phi, ph))
    r, c = linear_sum_assignment(C)
    tau_true = np.array([p.delay_at(est.t_ref) for p in paths])
    w_true = np.array([p.omega for p in paths])
    return (float(np.median(np.abs(est.theta[r] - th[c]))),
            float(np.median(np.abs(est.phi[r] - ph[c]))),
            float(np.median(np.abs(est.tau_ref[r] - tau_true[c]))),
            float(np.median(np.abs(est.omega[r] - w_true[c]))))


def run_trial(cfg: ScenarioConfig, snr_index: int, trial: int, axis: str = "none",
              axis_value: float = _NAN) -> list:
    """One channel realization scored at every CSI delay of the config."""
    t0 = time.perf_counter()
    geom, grid, spec = cfg.geometry(), cfg.grid(), cfg.path_spec()
    snr = cfg.snr_db[snr_index]
    pencil = cfg.pencil(noiseless=math.isinf(snr) and snr > 0)
    times = np.asarray(grid.sample_times)
    t_last = float(times[-1])
    delays = cfg.csi_delays
    rng = np.random.default_rng([cfg.seed, trial])
    paths, _ = draw_paths(rng, spec, geom.f_c)
    check_windows(paths, geom, grid, list(times) + [t_last + d for d in delays],
                  T_eff=float(times[1] - times[0]))
    X = channel_trajectory(geom, grid, paths)
    Y = add_awgn(X, snr, np.random.default_rng([cfg.seed, trial, 1, snr_index]))
    stale = stale_csi_baseline(Y.array[..., -1])

    base = dict(scenario=cfg.name, axis=axis, axis_value=axis_value, trial=trial, snr_db=snr,
                n_h=geom.n_h, n_v=geom.n_v, n_t=geom.n_t, n_f=grid.n_f, n_s=grid.n_s,
                n_paths=len(paths))
    status, est = "ok", None
    try:
        est = run_mdmp(Y, geom, grid, pencil,
                       resolution=cfg.values[("pencil", "pair_resolution")])
        errs = _param_errors(est, paths)
    except MDMPError as exc:
        status = exc.code
    recs = []
    for d in delays:
        truth = channel_snapshot(geom, grid, paths, t_last + d)
        s_ratio, s_db = nmse(stale, truth)
        rec = dict(base, csi_delay_s=d, nmse_stale=s_ratio, nmse_db_stale=s_db)
        st = status
        m_ratio = m_db = _NAN
        if est is not None:
            try:
                m_ratio, m_db = nmse(predict_channel(est, geom, grid, t_last + d), truth)
            except MDMPError as exc:
                st = exc.code
        if est is not None:
            q = est.quality
            rec.update(n_paths_hat=est.n_paths, err_theta=errs[0], err_phi=errs[1],
                       err_tau=errs[2], err_omega=errs[3],
                       offdiag_freq=q.get("offdiag_freq", _NAN),
                       offdiag_time=q.get("offdiag_time", _NAN),
                       gap_freq=q.get("gap_freq", _NAN),
                       pairing_cost=q.get("pairing_cost", _NAN))
        else:
            rec.update(n_paths_hat=0, err_theta=_NAN, err_phi=_NAN, err_tau=_NAN,
                       err_omega=_NAN, offdiag_freq=_NAN, offdiag_time=_NAN, gap_freq=_NAN,
                       pairing_cost=_NAN)
        rec.update(status=st, nmse_mdmp=m_ratio, nmse_db_mdmp=m_db)
        recs.append(MetricsRecord(**rec))
    wall = time.perf_counter() - t0
    for r in recs:
        r.wall_time = wall
    return recs


def _run_task(task):
    values, snr_index, trial, axis, axis_value = task
    return run_trial(ScenarioConfig(values), snr_index, trial, axis, axis_value)


def _execute(tasks, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        out = [_run_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(_run_task, tasks, chunksize=1))
    return [r for recs in out for r in recs]


def run_scenario(cfg: ScenarioConfig, workers: int = 1, axis: str = "none",
                 axis_value: float = _NAN) -> list:
    """All (snr, trial) realizations, each scored at every CSI delay."""
    cfg.validate()
    tasks = [(cfg.values, i, t, axis, axis_value)
             for i in range(len(cfg.snr_db)) for t in range(cfg.trials)]
    if not cfg.csi_delays:
        return []
    return _execute(tasks, workers)


def axis_variants(cfg: ScenarioConfig, axis: str):
    """(axis value, derived config) pairs for antennas/samples sweeps."""
    vals = dict(cfg.values)
    if axis == "antennas":
        for n_h, n_v in cfg.values[("run", "antennas")]:
            v = dict(vals)
            v[("geometry", "n_h")], v[("geometry", "n_v")] = n_h, n_v
            v[("pencil", "L")] = v[("pencil", "R")] = None
            yield float(n_h * n_v), ScenarioConfig(v)
    elif axis == "samples":
        for n_s in cfg.values[("run", "samples")]:
            v = dict(vals)
            v[("grid", "n_s")] = n_s
            v[("pencil", "Q")] = None
            yield float(n_s), ScenarioConfig(v)
    else:
        raise ValueError(f"unknown axis {axis!r}")


def sweep_records(cfg: ScenarioConfig, axis: str, workers: int = 1) -> list:
    if axis not in AXES:
        raise ValueError(f"axis must be one of {AXES}")
    if axis in ("snr", "csi_delay"):
        recs = run_scenario(cfg, workers, axis)
        for r in recs:
            r.axis_value = r.snr_db if axis == "snr" else r.csi_delay_s
        return recs
    variants = list(axis_variants(cfg, axis))
    for _, c in variants:
        c.validate()
    tasks = [(c.values, i, t, axis, val) for val, c in variants
             for i in range(len(c.snr_db)) for t in range(c.trials)]
    if not cfg.csi_delays:
        return []
    return _execute(tasks, workers)


def _db(x):
    return 10.0 * math.log10(x) if x > 0 else -math.inf


def aggregate(records: list) -> list:
    """One row per (axis value, snr, csi delay), in first-seen order."""
    groups = {}
    for r in records:
        groups.setdefault((r.axis_value, r.snr_db, r.csi_delay_s), []).append(r)
    rows = []
    for (_, snr, d), rs in groups.items():
        rs = sorted(rs, key=lambda r: r.trial)
        ok = [r for r in rs if r.status == "ok"]
        fails = [r.status for r in rs if r.status != "ok"]
        m = np.array([r.nmse_mdmp if r.status == "ok" else math.inf for r in rs])
        s = np.array([r.nmse_stale for r in rs])
        med = lambda name: float(np.median([getattr(r, name) for r in ok])) if ok else _NAN
        rows.append({
            "scenario": rs[0].scenario, "axis": rs[0].axis, "axis_value": rs[0].axis_value,
            "snr_db": snr, "csi_delay_s": d, "n_t": rs[0].n_t, "n_s": rs[0].n_s,
            "n_paths": rs[0].n_paths, "trials": len(rs), "failures": len(fails),
            "failure_codes": "|".join(f"{c}:{fails.count(c)}" for c in sorted(set(fails))),
            "nmse_db_mdmp": _db(float(np.mean([r.nmse_mdmp for r in ok]))) if ok else _NAN,
            "nmse_db_stale": _db(float(np.mean(s))),
            "median_nmse_db_mdmp": _db(float(np.median(m))),
            "median_nmse_db_stale": _db(float(np.median(s))),
            "median_err_theta": med("err_theta"), "median_err_phi": med("err_phi"),
            "median_err_tau": med("err_tau"), "median_err_omega": med("err_omega"),
            "median_offdiag_freq": med("offdiag_freq"),
        })
    return rows


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".12g")
    return str(v)


def csv_text(rows: list, columns: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def records_csv(records: list, timing: bool = False) -> str:
    cols = TRIAL_COLUMNS + (["wall_time"] if timing else [])
    return csv_text([asdict(r) for r in records], cols)


def sweep(cfg: ScenarioConfig, axis: str, out=None, workers: int = 1, trials_out=None,
          timing: bool = False) -> str:
    """Run a sweep and write the aggregate CSV (and optionally per-trial rows)."""
    recs = sweep_records(cfg, axis, workers)
    text = csv_text(aggregate(recs), AGG_COLUMNS)
    if out is not None:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    if trials_out is not None:
        with open(trials_out, "w", newline="") as fh:
            fh.write(records_csv(recs, timing))
    return text
