"""Pairing of the two estimate sets, gain recovery and channel prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AmbiguousPairingError, RankDeficientError, WindowViolationError
from .estimator import (
    AngleDelayEstimate,
    AngleDopplerEstimate,
    EstimateSet,
    estimate_angle_delay,
    estimate_angle_doppler,
)
from .pencil import PencilConfig
from .synth import ArrayGeometry, SamplingGrid, steering_grid
from .tensor import ComplexTensor, as_array

DEFAULT_GAIN_BUDGET = 4_000_000   # complex entries of the LS design matrix


@dataclass(frozen=True)
class PairingResult:
    perm: np.ndarray   # perm[a] = index in B paired with path a of A
    cost: float

    def matrix(self) -> np.ndarray:
        """0/1 matrix S with S[a, perm[a]] = 1."""
        n = self.perm.size
        S = np.zeros((n, n), dtype=int)
        S[np.arange(n), self.perm] = 1
        return S


def angle_cost(anglesA, anglesB) -> np.ndarray:
    A = np.asarray(anglesA, dtype=float).reshape(-1, 2)
    B = np.asarray(anglesB, dtype=float).reshape(-1, 2)
    return (np.abs(A[:, None, 0] - B[None, :, 0]) + np.abs(A[:, None, 1] - B[None, :, 1]))


def pair_paths(anglesA, anglesB, resolution=None) -> PairingResult:
    """One-to-one matching of (theta, phi) lists with minimum total |d theta| + |d phi|.

    Per-path nearest neighbours are used directly when they already form a
    bijection (then they are optimal); otherwise the assignment problem is
    solved. With ``resolution`` set, a collision whose optimal mean per-path
    cost exceeds it raises AmbiguousPairingError.
    """
    C = angle_cost(anglesA, anglesB)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError("angle lists must have equal length")
    if n == 0:
        return PairingResult(np.zeros(0, dtype=int), 0.0)
    nearest = np.argmin(C, axis=1)
    if np.unique(nearest).size == n:
        perm = nearest
    else:
        rows, cols = linear_sum_assignment(C)
        perm = np.empty(n, dtype=int)
        perm[rows] = cols
    cost = float(C[np.arange(n), perm].sum())
    if resolution is not None and np.unique(nearest).size != n and cost / n > resolution:
        raise AmbiguousPairingError(
            f"colliding nearest matches and mean pairing cost {cost / n:.3g} rad > {resolution:.3g}")
    return PairingResult(perm, cost)


def correct_doppler(omega_tau, pairing: PairingResult, k_tau, f1: float) -> np.ndarray:
    """w_p = w_tau[perm[p]] + f1 k_tau[p], in the order of the delay-rate list."""
    return np.asarray(omega_tau, dtype=float)[pairing.perm] + f1 * np.asarray(k_tau, dtype=float)


def _responses(est: EstimateSet, geom: ArrayGeometry, freqs: np.ndarray, t: float) -> np.ndarray:
    """Unit-gain path responses, shape (n_h, n_v, n_f, P)."""
    A = np.stack([steering_grid(geom, th, ph) for th, ph in zip(est.theta, est.phi)], axis=-1)
    tau = est.delay_at(t)
    c = np.exp(2j * np.pi * est.omega * t)
    B = np.exp(-2j * np.pi * np.outer(freqs, tau))           # (n_f, P)
    return A[:, :, None, :] * (B * c)[None, None, :, :]


def estimate_gains(samples, est: EstimateSet, geom: ArrayGeometry, grid: SamplingGrid,
                   budget: int = DEFAULT_GAIN_BUDGET) -> np.ndarray:
    """Least-squares complex gains over every (antenna, subcarrier, time) sample.

    ``samples`` is a sequence of (snapshot [ant_h, ant_v, freq], timestamp).
    When the design matrix would exceed ``budget`` entries only every fourth
    subcarrier is used.
    """
    P = est.n_paths
    freqs = grid.frequencies
    n_rows = len(samples) * geom.n_t * grid.n_f
    fidx = np.arange(grid.n_f)
    if n_rows * P > budget:
        fidx = fidx[::4]
    cols, rhs = [], []
    for snap, t in samples:
        M = _responses(est, geom, freqs[fidx], float(t))
        cols.append(M.reshape(-1, P))
        rhs.append(as_array(snap)[:, :, fidx].reshape(-1))
    M = np.concatenate(cols, axis=0)
    y = np.concatenate(rhs)
    if M.shape[0] < P:
        raise RankDeficientError("fewer samples than paths")
    g, _, rank, sv = np.linalg.lstsq(M, y, rcond=None)
    if sv.size == 0 or sv[-1] < 1e-10 * sv[0]:
        raise RankDeficientError("path responses are numerically collinear over the samples")
    return g


def predict_channel(est: EstimateSet, geom: ArrayGeometry, grid: SamplingGrid,
                    t_target: float) -> ComplexTensor:
    """Reconstruct the [ant_h, ant_v, freq] channel at an arbitrary time."""
    if est.gain is None:
        raise ValueError("estimate set has no gains")
    tau = est.delay_at(t_target)
    if np.any(np.abs(tau) >= 0.5 / grid.delta_f):
        raise WindowViolationError("predicted delay leaves the unambiguous window")
    M = _responses(est, geom, grid.frequencies, float(t_target))
    return ComplexTensor(M @ est.gain)


def stale_csi_baseline(last_sample) -> ComplexTensor:
    """No prediction: reuse the last observed snapshot."""
    if isinstance(last_sample, ComplexTensor):
        return last_sample
    return ComplexTensor(last_sample)


def combine_estimates(ad: AngleDelayEstimate, aw: AngleDopplerEstimate, f1: float,
                      resolution=None) -> EstimateSet:
    """Pair the two runs by angle and form the full per-path parameter set."""
    pairing = pair_paths(np.c_[ad.theta, ad.phi], np.c_[aw.theta, aw.phi], resolution)
    omega_tau = aw.omega_tau[pairing.perm]
    omega = correct_doppler(aw.omega_tau, pairing, ad.k_tau, f1)
    quality = dict(ad.quality)
    quality.update(aw.quality)
    quality["pairing_cost"] = pairing.cost
    return EstimateSet(ad.theta, ad.phi, ad.tau1, ad.t1, ad.k_tau, omega, omega_tau,
                       None, (ad.t1, ad.t2), quality)


def run_mdmp(trajectory, geom: ArrayGeometry, grid: SamplingGrid, cfg: PencilConfig,
             ref=(0, -1), resolution=None, budget: int = DEFAULT_GAIN_BUDGET) -> EstimateSet:
    """Full estimation from a [ant_h, ant_v, freq, time] trajectory.

    Angles, delays and delay rates come from the snapshots at indices ``ref``,
    effective Doppler from the first-subcarrier time series, and gains from a
    least-squares fit over all samples.
    """
    X = as_array(trajectory)
    times = np.asarray(grid.sample_times, dtype=float)
    if X.shape[-1] != times.size:
        raise ValueError("trajectory time axis does not match grid.sample_times")
    i1, i2 = ref
    ad = estimate_angle_delay(X[..., i1], X[..., i2], (times[i1], times[i2]), geom, grid, cfg)
    aw = estimate_angle_doppler(X[:, :, 0, :], times, geom, cfg, ad.n_paths)
    est = combine_estimates(ad, aw, grid.f1, resolution)
    samples = [(X[..., i], times[i]) for i in range(times.size)]
    return est.with_gain(estimate_gains(samples, est, geom, grid, budget))
