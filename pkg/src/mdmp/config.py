"""Scenario configuration: an INI-style key/value file with a fixed schema.

Every key has a default, so an empty file is a valid scenario. Values can be
overridden with ``section.key=value`` strings (the CLI ``--set`` flag).
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field

from .errors import ConfigError
from .pencil import PencilConfig, feasibility_check
from .synth import ArrayGeometry, PathSpec, SamplingGrid

CONFIG_SCHEMA_VERSION = "mdmp.scenario/1"


def _floats(text):
    text = text.strip()
    if not text:
        return ()
    return tuple(float(v) for v in text.replace(";", ",").split(","))


def _ints(text):
    return tuple(int(v) for v in _floats(text))


def _opt_float(text):
    text = text.strip().lower()
    return None if text in ("", "none") else float(text)


def _auto_int(text):
    text = text.strip().lower()
    return None if text == "auto" else int(text)


def _arrays(text):
    out = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if "x" in tok:
            a, b = tok.split("x")
            out.append((int(a), int(b)))
        else:
            n = math.isqrt(int(tok))
            if n * n != int(tok):
                raise ConfigError(f"antenna count {tok} is not a square; use NHxNV")
            out.append((n, n))
    return tuple(out)


# (section, key, parser, default text, description)
SCHEMA = [
    ("geometry", "n_h", int, "8", "horizontal elements N_h"),
    ("geometry", "n_v", int, "8", "vertical elements N_v"),
    ("geometry", "dh_lambda", float, "0.5", "horizontal spacing in wavelengths"),
    ("geometry", "dv_lambda", float, "0.8", "vertical spacing in wavelengths"),
    ("geometry", "f_c", float, "3.5e9", "carrier frequency [Hz]"),
    ("grid", "delta_f", float, "30e3", "subcarrier spacing [Hz]"),
    ("grid", "n_f", int, "64", "subcarriers N_f"),
    ("grid", "T", float, "0.5e-3", "pilot interval [s]"),
    ("grid", "n_s", int, "16", "observed samples N_s"),
    ("grid", "sample_step", int, "1", "samples taken every sample_step*T"),
    ("grid", "f1", _opt_float, "none",
     "first subcarrier [Hz]; none = absolute f_c - n_f/2*delta_f"),
    ("paths", "count", int, "6", "paths per channel P"),
    ("paths", "theta_max", float, "0.5", "elevation drawn in +-theta_max [rad]"),
    ("paths", "phi_max", float, "1.0", "azimuth drawn in +-phi_max [rad]"),
    ("paths", "min_separation", float, "0.05", "min |dtheta|+|dphi| between paths [rad]"),
    ("paths", "delay_min", float, "0.1e-6", "initial delay lower bound [s]"),
    ("paths", "delay_max", float, "3e-6", "initial delay upper bound [s]"),
    ("paths", "speed_kmh", _opt_float, "120", "user speed [km/h]; none = explicit Doppler"),
    ("paths", "eoa_max", float, "0.2", "arrival elevation drawn in +-eoa_max [rad]"),
    ("paths", "doppler_max", float, "300", "explicit Doppler drawn in +-doppler_max [Hz]"),
    ("paths", "gain_spread_db", float, "0", "path power drawn in [-spread, 0] dB"),
    ("pencil", "L", _auto_int, "6", "horizontal window; auto = N_h//2 + 1"),
    ("pencil", "R", _auto_int, "5", "vertical window; auto = N_v//2 + 1"),
    ("pencil", "K", _auto_int, "auto", "frequency window; auto = N_f//2"),
    ("pencil", "Q", _auto_int, "auto", "temporal window; auto = max(2, N_s//2)"),
    ("pencil", "gamma1", float, "0.05", "relative detection threshold, noisy data"),
    ("pencil", "gamma1_noiseless", float, "1e-8", "relative detection threshold, snr = inf"),
    ("pencil", "pair_resolution", _opt_float, "none",
     "mean pairing cost [rad] above which colliding matches fail; none = never"),
    ("run", "snr_db", _floats, "20", "per-element SNR list [dB]; inf = noiseless"),
    ("run", "csi_delay_ms", _floats, "4, 8, 12, 16, 20", "prediction horizons t_tau [ms]"),
    ("run", "antennas", _arrays, "8x8", "array sizes for the antennas axis (NHxNV or square N)"),
    ("run", "samples", _ints, "16", "N_s values for the samples axis"),
    ("run", "trials", int, "20", "Monte-Carlo trials per point"),
    ("run", "seed", int, "1", "master seed"),
    ("run", "name", str, "scenario", "scenario id written to the CSV"),
]

_KEYS = {(s, k): (p, d) for s, k, p, d, _ in SCHEMA}


def schema_text() -> str:
    lines = [f"# {CONFIG_SCHEMA_VERSION}", "# INI file; every key optional (default shown)."]
    section = None
    for s, k, _, d, help_ in SCHEMA:
        if s != section:
            lines.append(f"\n[{s}]")
            section = s
        lines.append(f"{k} = {d:<18} ; {help_}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ScenarioConfig:
    values: dict = field(default_factory=dict)

    def __getitem__(self, key):
        return self.values[key]

    def updated(self, **changes) -> "ScenarioConfig":
        """Copy with values replaced; keys are written section_key, e.g. run_trials=5."""
        vals = dict(self.values)
        for k, v in changes.items():
            sec, key = k.split("_", 1)
            if (sec, key) not in _KEYS:
                raise ConfigError(f"unknown key {k}")
            vals[(sec, key)] = v
        return ScenarioConfig(vals)

    # convenience accessors
    @property
    def name(self):
        return self.values[("run", "name")]

    @property
    def seed(self):
        return self.values[("run", "seed")]

    @property
    def trials(self):
        return self.values[("run", "trials")]

    @property
    def snr_db(self):
        return self.values[("run", "snr_db")]

    @property
    def csi_delays(self):
        return tuple(v * 1e-3 for v in self.values[("run", "csi_delay_ms")])

    def geometry(self) -> ArrayGeometry:
        g = lambda k: self.values[("geometry", k)]
        return ArrayGeometry.from_wavelengths(g("n_v"), g("n_h"), g("dv_lambda"),
                                              g("dh_lambda"), g("f_c"))

    def grid(self) -> SamplingGrid:
        g = lambda k: self.values[("grid", k)]
        f1 = g("f1")
        if f1 is None:
            f1 = self.values[("geometry", "f_c")] - (g("n_f") // 2) * g("delta_f")
        times = tuple(i * g("sample_step") * g("T") for i in range(g("n_s")))
        return SamplingGrid(f1, g("delta_f"), g("n_f"), g("T"), times)

    def path_spec(self) -> PathSpec:
        g = lambda k: self.values[("paths", k)]
        speed = g("speed_kmh")
        return PathSpec(g("count"), g("theta_max"), g("phi_max"), g("min_separation"),
                        g("delay_min"), g("delay_max"),
                        None if speed is None else speed / 3.6,
                        g("eoa_max"), g("doppler_max"), g("gain_spread_db"))

    def pencil(self, noiseless: bool = False) -> PencilConfig:
        g = lambda k: self.values[("pencil", k)]
        n_h, n_v = self.values[("geometry", "n_h")], self.values[("geometry", "n_v")]
        n_f, n_s = self.values[("grid", "n_f")], self.values[("grid", "n_s")]
        L = g("L") if g("L") is not None else n_h // 2 + 1
        R = g("R") if g("R") is not None else n_v // 2 + 1
        K = g("K") if g("K") is not None else n_f // 2
        Q = g("Q") if g("Q") is not None else max(2, n_s // 2)
        return PencilConfig(L, R, K, Q, g("gamma1_noiseless") if noiseless else g("gamma1"))

    def validate(self) -> None:
        """Check pencil feasibility and that every drawable path stays identifiable."""
        geom, grid, spec = self.geometry(), self.grid(), self.path_spec()
        pc = self.pencil()
        P = spec.count
        if grid.n_s < 2:
            raise ConfigError("need at least two samples")
        for mode, n in (("freq", grid.n_f), ("time", grid.n_s)):
            rep = feasibility_check(pc, geom.n_h, geom.n_v, n, P, mode)
            if not rep.ok:
                raise ConfigError(f"{mode} pencil infeasible: " + "; ".join(rep.violations))
        lam = geom.wavelength
        if geom.d_v * math.sin(spec.theta_max) / lam >= 0.5:
            raise ConfigError("theta_max lets the vertical spatial frequency alias")
        if geom.d_h * math.sin(min(spec.phi_max, math.pi / 2)) / lam >= 0.5:
            raise ConfigError("phi_max lets the horizontal spatial frequency alias")
        if spec.speed is not None:
            w_max = spec.speed / lam
        else:
            w_max = spec.doppler_max
        k_max = w_max / geom.f_c
        t_end = grid.sample_times[-1] + max(self.csi_delays, default=0.0)
        if spec.delay_max + k_max * t_end >= 0.5 / grid.delta_f or spec.delay_min - k_max * t_end <= -0.5 / grid.delta_f:
            raise ConfigError("delays can leave the unambiguous window (-1/(2df), 1/(2df))")
        T_eff = grid.sample_times[1] - grid.sample_times[0]
        if w_max * (1 + abs(grid.f1) / geom.f_c) >= 0.5 / T_eff:
            raise ConfigError("effective Doppler can alias at the sample spacing")


def default_config() -> ScenarioConfig:
    return load_config_text("")


def _parse_into(vals, section, key, text):
    if (section, key) not in _KEYS:
        raise ConfigError(f"unknown key [{section}] {key}")
    parser = _KEYS[(section, key)][0]
    try:
        vals[(section, key)] = parser(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"[{section}] {key} = {text!r}: {exc}") from None


def load_config_text(text: str, overrides=()) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    cp.read_string(text)
    vals = {}
    for s, k, _, d, _ in SCHEMA:
        _parse_into(vals, s, k, d)
    for section in cp.sections():
        for key, value in cp[section].items():
            _parse_into(vals, section, key, value)
    for ov in overrides:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(f"override {ov!r} is not section.key=value")
        lhs, value = ov.split("=", 1)
        section, key = lhs.strip().split(".", 1)
        _parse_into(vals, section, key, value)
    return ScenarioConfig(vals)


def load_config(path=None, overrides=()) -> ScenarioConfig:
    text = ""
    if path is not None:
        with open(path) as fh:
            text = fh.read()
    return load_config_text(text, overrides)
