"""Command line entry point: ``mdmp {simulate,estimate,predict,bounds,sweep}``."""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import bounds as bnd
from .config import load_config, schema_text
from .errors import MDMPError
from .estimator import EstimateSet
from .harness import AXES, sweep
from .predict import predict_channel, run_mdmp
from .synth import add_awgn, channel_trajectory, check_windows, draw_paths
from .tensor import SNAPSHOT_AXES, TRAJECTORY_AXES, AxisSpec, read_cct, write_cct

PATHS_SCHEMA = "mdmp.paths/1"


def _cfg(args):
    overrides = list(args.set or [])
    if getattr(args, "seed", None) is not None:
        overrides.append(f"run.seed={args.seed}")
    return load_config(args.config, overrides)


def _emit(text, out):
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_simulate(args):
    cfg = _cfg(args)
    cfg.validate()
    geom, grid = cfg.geometry(), cfg.grid()
    rng = np.random.default_rng([cfg.seed, args.trial])
    paths, _ = draw_paths(rng, cfg.path_spec(), geom.f_c)
    check_windows(paths, geom, grid, grid.sample_times,
                  T_eff=grid.sample_times[1] - grid.sample_times[0])
    X = channel_trajectory(geom, grid, paths)
    snr = cfg.snr_db[0] if args.snr is None else args.snr
    Y = add_awgn(X, snr, np.random.default_rng([cfg.seed, args.trial, 1, 0]))
    write_cct(Y, AxisSpec(TRAJECTORY_AXES, Y.dims), args.out)
    truth = {
        "schema": PATHS_SCHEMA,
        "snr_db": snr if math.isfinite(snr) else str(snr),
        "sample_times": list(grid.sample_times),
        "paths": [{"theta": p.theta, "phi": p.phi, "tau0": p.tau0, "k_tau": p.k_tau,
                   "omega": p.omega, "gain": [p.gain.real, p.gain.imag]} for p in paths],
    }
    with open(args.out + ".paths.json", "w") as fh:
        json.dump(truth, fh, indent=2)
    return 0


def cmd_estimate(args):
    cfg = _cfg(args)
    geom, grid = cfg.geometry(), cfg.grid()
    X, axes = read_cct(args.input)
    if axes.names != TRAJECTORY_AXES:
        raise SystemExit(f"expected axes {TRAJECTORY_AXES}, file has {axes.names}")
    pc = cfg.pencil(noiseless=args.noiseless)
    est = run_mdmp(X, geom, grid, pc, resolution=cfg.values[("pencil", "pair_resolution")])
    _emit(json.dumps(est.to_dict(), indent=2) + "\n", args.out)
    return 0


def cmd_predict(args):
    cfg = _cfg(args)
    geom, grid = cfg.geometry(), cfg.grid()
    with open(args.estimates) as fh:
        est = EstimateSet.from_dict(json.load(fh))
    H = predict_channel(est, geom, grid, args.t_target)
    write_cct(H, AxisSpec(SNAPSHOT_AXES, H.dims), args.out)
    return 0


def cmd_bounds(args):
    inp = bnd.BoundInputs(args.nv, args.ns, args.q, args.p)
    rep = bnd.lower_bound_Nt(inp)
    d = rep.to_dict()
    if args.n_h_max:
        d["brute_force_n_h"] = bnd.brute_force_bound_oracle(inp, args.n_h_max)
    _emit(json.dumps(d, indent=2) + "\n", args.out)
    return 0


def cmd_sweep(args):
    cfg = _cfg(args)
    text = sweep(cfg, args.axis, None, args.workers, args.trials_out, args.timing)
    _emit(text, args.out)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="mdmp", description="MDMP channel prediction toolkit")
    ap.add_argument("--print-schema", action="store_true", help="print the config schema and exit")
    sub = ap.add_subparsers(dest="cmd")

    def common(p):
        p.add_argument("--config", help="scenario INI file")
        p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                       help="override a config value (repeatable)")
        p.add_argument("--seed", type=int, help="override run.seed")

    p = sub.add_parser("simulate", help="generate a noisy trajectory as a CCT1 file")
    common(p)
    p.add_argument("--trial", type=int, default=0, help="trial index of the realization")
    p.add_argument("--snr", type=float, help="SNR in dB (default: first run.snr_db)")
    p.add_argument("--out", required=True, help="output CCT1 path; truth goes to OUT.paths.json")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="estimate paths from a CCT1 trajectory")
    common(p)
    p.add_argument("--input", required=True, help="CCT1 trajectory [ant_h, ant_v, freq, time]")
    p.add_argument("--noiseless", action="store_true", help="use pencil.gamma1_noiseless")
    p.add_argument("--out", help="EstimateSet JSON (default stdout)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("predict", help="predict a snapshot from an EstimateSet")
    common(p)
    p.add_argument("--estimates", required=True, help="EstimateSet JSON")
    p.add_argument("--t-target", type=float, required=True, help="target time [s]")
    p.add_argument("--out", required=True, help="output CCT1 path")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("bounds", help="antenna lower bound report")
    p.add_argument("--nv", type=int, required=True)
    p.add_argument("--ns", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--n-h-max", type=int, default=0, help="also run the brute-force search")
    p.add_argument("--out", help="JSON output (default stdout)")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("sweep", help="Monte-Carlo sweep to CSV")
    common(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", help="aggregate CSV (default stdout)")
    p.add_argument("--trials-out", help="per-trial CSV")
    p.add_argument("--timing", action="store_true", help="add wall_time to the per-trial CSV")
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.print_schema:
        sys.stdout.write(schema_text())
        return 0
    if args.cmd is None:
        ap.print_help()
        return 2
    try:
        return args.func(args)
    except MDMPError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
