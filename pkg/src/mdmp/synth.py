"""Synthetic wideband multipath channels for a uniform planar array.

Per path p the channel at antenna (s_h, s_v), subcarrier f and time t is

    g_p * a_h^s_h * a_v^s_v * exp(j 2 pi w_p t) * exp(-j 2 pi f tau_p(t))

with a_h = exp(j 2 pi d_h cos(theta) sin(phi) / lambda0),
a_v = exp(j 2 pi d_v sin(theta) / lambda0) and tau_p(t) = tau0 + k_tau t.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyPathsError, WindowViolationError, ZeroSignalError
from .tensor import ComplexTensor, as_array

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayGeometry:
    n_v: int
    n_h: int
    d_v: float
    d_h: float
    f_c: float

    def __post_init__(self):
        if self.n_v < 1 or self.n_h < 1:
            raise ValueError("element counts must be >= 1")
        if not (self.d_v > 0 and self.d_h > 0 and self.f_c > 0):
            raise ValueError("spacings and carrier frequency must be positive")

    @classmethod
    def from_wavelengths(cls, n_v, n_h, dv_lambda=0.8, dh_lambda=0.5, f_c=3.5e9):
        lam = SPEED_OF_LIGHT / f_c
        return cls(int(n_v), int(n_h), dv_lambda * lam, dh_lambda * lam, float(f_c))

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.f_c

    @property
    def n_t(self) -> int:
        return self.n_v * self.n_h


@dataclass(frozen=True)
class SamplingGrid:
    f1: float
    delta_f: float
    n_f: int
    T: float
    sample_times: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "sample_times", tuple(float(t) for t in self.sample_times))
        if self.n_f < 1 or self.delta_f <= 0 or self.T <= 0:
            raise ValueError("n_f >= 1, delta_f > 0 and T > 0 required")
        ts = np.asarray(self.sample_times)
        if ts.size and np.any(np.diff(ts) <= 0):
            raise ValueError("sample_times must be strictly increasing")

    @property
    def frequencies(self) -> np.ndarray:
        return self.f1 + self.delta_f * np.arange(self.n_f)

    @property
    def n_s(self) -> int:
        return len(self.sample_times)


@dataclass(frozen=True)
class PathTruth:
    theta: float
    phi: float
    tau0: float
    k_tau: float
    omega: float
    gain: complex = 1.0 + 0.0j

    def delay_at(self, t):
        return self.tau0 + self.k_tau * np.asarray(t, dtype=float)


@dataclass(frozen=True)
class VelocitySpec:
    speed: float
    theta_v: float = 0.0
    phi_v: float = 0.0
    arrival: tuple = field(default_factory=tuple)   # per path (eoa, aoa)

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("speed must be >= 0")


def unit_direction(elev, azim):
    return np.array([np.cos(elev) * np.cos(azim), np.cos(elev) * np.sin(azim), np.sin(elev)])


def steering_factors(geom: ArrayGeometry, theta, phi):
    """Per-element phase ratios (a_h, a_v)."""
    lam = geom.wavelength
    a_h = np.exp(2j * np.pi * geom.d_h * np.cos(theta) * np.sin(phi) / lam)
    a_v = np.exp(2j * np.pi * geom.d_v * np.sin(theta) / lam)
    return a_h, a_v


def steering_grid(geom: ArrayGeometry, theta, phi) -> np.ndarray:
    """Steering response as an (n_h, n_v) array."""
    lam = geom.wavelength
    u_h = geom.d_h * np.cos(theta) * np.sin(phi) / lam
    u_v = geom.d_v * np.sin(theta) / lam
    sh = np.arange(geom.n_h)[:, None]
    sv = np.arange(geom.n_v)[None, :]
    return np.exp(2j * np.pi * (sh * u_h + sv * u_v))


def steering_vector(geom: ArrayGeometry, theta: float, phi: float) -> np.ndarray:
    """Flat steering vector, entry s_h * n_v + s_v equals a_h**s_h * a_v**s_v."""
    return steering_grid(geom, theta, phi).reshape(-1)


def doppler_from_velocity(vel: VelocitySpec, path_index: int, f_c: float):
    """Return (omega [Hz], k_tau) for one path from the user velocity."""
    lam = SPEED_OF_LIGHT / f_c
    eoa, aoa = vel.arrival[path_index]
    v = vel.speed * unit_direction(vel.theta_v, vel.phi_v)
    omega = float(unit_direction(eoa, aoa) @ v) / lam
    return omega, -omega / f_c


def path_delay_at(path: PathTruth, t):
    return path.tau0 + path.k_tau * t


def _path_arrays(paths):
    if len(paths) == 0:
        raise EmptyPathsError("at least one path is required")
    P = np.array([[p.theta, p.phi, p.tau0, p.k_tau, p.omega] for p in paths], dtype=float)
    g = np.array([p.gain for p in paths], dtype=np.complex128)
    return P[:, 0], P[:, 1], P[:, 2], P[:, 3], P[:, 4], g


def _snapshot_array(geom, freqs, paths, t):
    theta, phi, tau0, k, omega, g = _path_arrays(paths)
    A = np.stack([steering_grid(geom, th, ph) for th, ph in zip(theta, phi)], axis=-1)
    tau_t = tau0 + k * t
    c = g * np.exp(2j * np.pi * omega * t)
    B = np.exp(-2j * np.pi * np.outer(tau_t, freqs))          # (P, n_f)
    return np.einsum("hvp,p,pf->hvf", A, c, B)


def channel_snapshot(geom: ArrayGeometry, grid: SamplingGrid, paths: Sequence[PathTruth],
                     t: float) -> ComplexTensor:
    """Noise-free snapshot [ant_h, ant_v, freq] at time t."""
    return ComplexTensor(_snapshot_array(geom, grid.frequencies, paths, float(t)))


def channel_trajectory(geom: ArrayGeometry, grid: SamplingGrid,
                       paths: Sequence[PathTruth], times=None) -> ComplexTensor:
    """Snapshots stacked on a trailing time axis: [ant_h, ant_v, freq, time]."""
    times = grid.sample_times if times is None else tuple(times)
    freqs = grid.frequencies
    out = np.stack([_snapshot_array(geom, freqs, paths, float(t)) for t in times], axis=-1)
    return ComplexTensor(out)


def add_awgn(tensor, snr_db: float, seed) -> ComplexTensor:
    """Add circular Gaussian noise at a per-element SNR relative to mean signal power.

    ``snr_db = inf`` returns the input unchanged. ``seed`` may be an int,
    SeedSequence or Generator.
    """
    arr = as_array(tensor)
    power = float(np.mean(np.abs(arr) ** 2))
    if power == 0.0:
        raise ZeroSignalError("cannot set an SNR for an all-zero tensor")
    if np.isposinf(snr_db):
        return tensor if isinstance(tensor, ComplexTensor) else ComplexTensor(arr)
    rng = np.random.default_rng(seed)
    sigma2 = power / 10.0 ** (snr_db / 10.0)
    noise = rng.standard_normal(arr.shape + (2,)) @ np.array([1.0, 1.0j])
    return ComplexTensor(arr + np.sqrt(sigma2 / 2.0) * noise)


def check_windows(paths, geom: ArrayGeometry, grid: SamplingGrid, times, T_eff=None):
    """Raise WindowViolationError if a path leaves an unambiguous decoding window.

    Checks delays at every time in ``times``, the effective Doppler
    w - f1 k_tau against the temporal sample spacing, and the spatial phase
    increments against half a cycle.
    """
    T_eff = grid.T if T_eff is None else T_eff
    lam = geom.wavelength
    times = np.asarray(times, dtype=float)
    for i, p in enumerate(paths):
        tau = p.delay_at(times)
        if np.any(np.abs(tau) >= 0.5 / grid.delta_f):
            raise WindowViolationError(f"path {i}: delay leaves (-1/(2df), 1/(2df))")
        w_tau = p.omega - grid.f1 * p.k_tau
        if abs(w_tau) >= 0.5 / T_eff:
            raise WindowViolationError(f"path {i}: effective Doppler {w_tau:.4g} Hz aliases")
        if abs(geom.d_v * np.sin(p.theta) / lam) >= 0.5:
            raise WindowViolationError(f"path {i}: vertical spatial frequency aliases")
        if abs(geom.d_h * np.cos(p.theta) * np.sin(p.phi) / lam) >= 0.5:
            raise WindowViolationError(f"path {i}: horizontal spatial frequency aliases")


@dataclass(frozen=True)
class PathSpec:
    """Random path-generation settings.

    Departure angles are uniform in [-theta_max, theta_max] x [-phi_max, phi_max]
    with pairwise |d theta| + |d phi| >= min_separation. With ``speed`` set,
    Doppler follows from a horizontal velocity of uniform azimuth and per-path
    arrival directions (elevation uniform in +-eoa_max, azimuth uniform);
    otherwise it is uniform in +-doppler_max with k_tau = -w / f_c.
    """
    count: int = 4
    theta_max: float = 0.5
    phi_max: float = 1.0
    min_separation: float = 0.05
    delay_min: float = 0.1e-6
    delay_max: float = 3.0e-6
    speed: float | None = 120 / 3.6
    eoa_max: float = 0.2
    doppler_max: float = 300.0
    gain_spread_db: float = 0.0


def draw_paths(rng: np.random.Generator, spec: PathSpec, f_c: float, max_tries: int = 10_000):
    """Draw ``spec.count`` paths; returns (paths, velocity or None)."""
    angles = []
    tries = 0
    while len(angles) < spec.count:
        tries += 1
        if tries > max_tries:
            raise ValueError("could not place paths with the requested angular separation")
        th = rng.uniform(-spec.theta_max, spec.theta_max)
        ph = rng.uniform(-spec.phi_max, spec.phi_max)
        if all(abs(th - a) + abs(ph - b) >= spec.min_separation for a, b in angles):
            angles.append((th, ph))
    tau0 = rng.uniform(spec.delay_min, spec.delay_max, spec.count)
    mags = 10.0 ** (-rng.uniform(0.0, spec.gain_spread_db, spec.count) / 20.0)
    gains = mags * np.exp(2j * np.pi * rng.random(spec.count))
    vel = None
    if spec.speed is not None:
        arrival = tuple((rng.uniform(-spec.eoa_max, spec.eoa_max), rng.uniform(-np.pi, np.pi))
                        for _ in range(spec.count))
        vel = VelocitySpec(spec.speed, 0.0, rng.uniform(-np.pi, np.pi), arrival)
        dop = [doppler_from_velocity(vel, p, f_c) for p in range(spec.count)]
    else:
        w = rng.uniform(-spec.doppler_max, spec.doppler_max, spec.count)
        dop = [(wi, -wi / f_c) for wi in w]
    paths = [PathTruth(th, ph, float(t0), float(k), float(w), complex(g))
             for (th, ph), t0, (w, k), g in zip(angles, tau0, dop, gains)]
    return paths, vel
