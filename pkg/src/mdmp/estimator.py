"""Subspace estimation of angles, delays and Doppler from real-valued pencils.

One "run" takes a 3-D pencil (frequency or time as the third axis), extracts
the signal subspace of its real-valued form, builds three real matrices Psi
(one per shift axis) and diagonalizes them with the eigenvectors of the
primary one. Eigenvalues are tangents of half the per-index phase steps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import (
    AllZeroError,
    ComplexEigenvaluesError,
    DomainError,
    PathCountMismatchError,
    PreconditionError,
    RankDeficientError,
)
from .pencil import PencilConfig, Selection, build_G3_freq, build_G3_time, selection_J, shuffle_left
from .synth import ArrayGeometry, SamplingGrid
from .unitary import to_real_pencil, unitary_Q


class BranchEdgeWarning(RuntimeWarning):
    pass


@dataclass
class SubspaceBundle:
    U_s: np.ndarray
    singular_values: np.ndarray
    n_paths: int

    @property
    def gap(self) -> float:
        """s_{P+1} / s_P, 0 when no further singular value exists."""
        s, p = self.singular_values, self.n_paths
        if p >= s.size or s[p - 1] == 0:
            return 0.0
        return float(s[p] / s[p - 1])


@dataclass
class EigenSolution:
    W: np.ndarray
    z: list                 # primary first, then one array per secondary
    offdiag_residual: float


@dataclass
class RunResult:
    """Decoded output of one pencil run, in primary-eigenvalue order."""
    theta: np.ndarray
    phi: np.ndarray
    third: np.ndarray       # delay [s] (freq run) or effective Doppler [Hz] (time run)
    subspace: SubspaceBundle
    eig: EigenSolution


@dataclass
class AngleDelayEstimate:
    theta: np.ndarray
    phi: np.ndarray
    tau1: np.ndarray
    tau2: np.ndarray
    k_tau: np.ndarray
    t1: float
    t2: float
    quality: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return self.theta.size


@dataclass
class AngleDopplerEstimate:
    theta: np.ndarray
    phi: np.ndarray
    omega_tau: np.ndarray
    quality: dict = field(default_factory=dict)


@dataclass
class EstimateSet:
    """Per-path parameters in a common order.

    ``tau_ref`` is the delay at ``t_ref``; the delay at t is
    tau_ref + k_tau (t - t_ref). ``gain`` is None until estimated.
    """
    theta: np.ndarray
    phi: np.ndarray
    tau_ref: np.ndarray
    t_ref: float
    k_tau: np.ndarray
    omega: np.ndarray
    omega_tau: np.ndarray | None = None
    gain: np.ndarray | None = None
    timestamps: tuple = ()
    quality: dict = field(default_factory=dict)

    @property
    def n_paths(self) -> int:
        return int(np.size(self.theta))

    def delay_at(self, t):
        return self.tau_ref + self.k_tau * (t - self.t_ref)

    def with_gain(self, gain):
        d = dict(self.__dict__)
        d["gain"] = np.asarray(gain, dtype=np.complex128)
        return EstimateSet(**d)

    def to_dict(self) -> dict:
        paths = []
        for p in range(self.n_paths):
            rec = {
                "theta": float(self.theta[p]),
                "phi": float(self.phi[p]),
                "tau_ref": float(self.tau_ref[p]),
                "k_tau": float(self.k_tau[p]),
                "omega": float(self.omega[p]),
            }
            if self.omega_tau is not None:
                rec["omega_tau"] = float(self.omega_tau[p])
            if self.gain is not None:
                rec["gain"] = [float(self.gain[p].real), float(self.gain[p].imag)]
            paths.append(rec)
        return {
            "schema": "mdmp.estimate_set/1",
            "t_ref": float(self.t_ref),
            "timestamps": [float(t) for t in self.timestamps],
            "paths": paths,
            "quality": {k: float(v) for k, v in self.quality.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EstimateSet":
        if d.get("schema") != "mdmp.estimate_set/1":
            raise ValueError(f"unsupported schema {d.get('schema')!r}")
        ps = d["paths"]
        col = lambda k: np.array([p[k] for p in ps], dtype=float)
        gain = None
        if ps and all("gain" in p for p in ps):
            gain = np.array([complex(*p["gain"]) for p in ps])
        omega_tau = col("omega_tau") if ps and all("omega_tau" in p for p in ps) else None
        return cls(col("theta"), col("phi"), col("tau_ref"), float(d["t_ref"]), col("k_tau"),
                   col("omega"), omega_tau, gain, tuple(d.get("timestamps", ())),
                   dict(d.get("quality", {})))


def detect_paths(singular_values, gamma1: float) -> int:
    """Count singular values at or above gamma1 times the largest."""
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0 or s[0] <= 0:
        raise AllZeroError("largest singular value is zero")
    return int(np.count_nonzero(s >= gamma1 * s[0]))


def signal_subspace(G_re: np.ndarray, gamma1=None, n_paths=None) -> SubspaceBundle:
    """Dominant left singular vectors of a real pencil.

    Exactly one of ``gamma1`` (detect the count) and ``n_paths`` (fixed count)
    is used; ``n_paths`` wins when both are given.
    """
    U, s, _ = np.linalg.svd(G_re, full_matrices=False)
    if n_paths is None:
        n_paths = detect_paths(s, gamma1)
    elif s.size == 0 or s[0] <= 0:
        raise AllZeroError("largest singular value is zero")
    if n_paths > U.shape[1]:
        raise RankDeficientError(f"{n_paths} paths exceed pencil dimension {U.shape[1]}")
    if s[n_paths - 1] < 1e-10 * s[0]:
        raise RankDeficientError(
            f"pencil rank is below the requested {n_paths} paths "
            f"(s_P/s_1 = {s[n_paths - 1] / s[0]:.2e})")
    return SubspaceBundle(U[:, :n_paths], s, int(n_paths))


def psi_matrix(U_s: np.ndarray, selector: Selection, shuffle=None) -> np.ndarray:
    """Real shift-invariance matrix pinv(Re(M U')) Im(M U').

    M = Q_m^H J Q_mu with J the leading ``selector.count`` rows. A row
    shuffle S is applied in the complex domain, i.e. U' = Q^H S Q U_s, which is
    again real.
    """
    mu = U_s.shape[0]
    m = selector.count
    if m == 0:
        raise RankDeficientError("empty selection, window size 1 along the shift axis")
    X = unitary_Q(mu).apply(U_s)
    if shuffle is not None:
        X = X[np.asarray(shuffle)]
    Y = unitary_Q(m).apply_h(X[selector.first])
    A, B = Y.real, Y.imag
    sv = np.linalg.svd(A, compute_uv=False)
    if sv.size == 0 or sv[-1] < 1e-10 * max(sv[0], np.finfo(float).tiny) or A.shape[0] < A.shape[1]:
        raise RankDeficientError("shift-invariance system is numerically singular")
    return np.linalg.lstsq(A, B, rcond=None)[0]


def joint_diagonalize(psi_primary: np.ndarray, psi_secondary=()) -> EigenSolution:
    """Eigenvectors of the primary matrix applied to all matrices.

    Paths are ordered by increasing primary eigenvalue.
    """
    lam, W = np.linalg.eig(psi_primary)
    bad = np.abs(lam.imag) > 1e-8 * np.abs(lam)
    if np.any(bad):
        raise ComplexEigenvaluesError(
            f"primary eigenvalues not real: max |Im| = {np.abs(lam.imag).max():.3g}")
    order = np.argsort(lam.real, kind="stable")
    lam = lam.real[order]
    W = W.real[:, order]
    z = [lam]
    resid = 0.0
    for psi in psi_secondary:
        D = np.linalg.solve(W, psi @ W)
        z.append(np.diag(D).copy())
        off = D - np.diag(np.diag(D))
        if off.size:
            resid = max(resid, float(np.abs(off).max()))
    return EigenSolution(W, z, resid)


def _atan_decode(z, scale, what):
    z = np.asarray(z, dtype=float)
    big = np.abs(z) > 1e12
    if np.any(big):
        warnings.warn(f"{what}: eigenvalue at the branch edge, decoded to the window boundary",
                      BranchEdgeWarning, stacklevel=3)
    return np.arctan(z) / scale


def decode_delay(z, delta_f: float):
    """arctan(z) / (pi df), in (-1/(2df), 1/(2df))."""
    return _atan_decode(z, np.pi * delta_f, "delay")


def decode_doppler(z, T: float):
    """-arctan(z) / (pi T): effective Doppler w - f1 k_tau, in (-1/(2T), 1/(2T))."""
    return -_atan_decode(z, np.pi * T, "doppler")


def _asin_checked(x, what):
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > 1 + 1e-9):
        raise DomainError(f"{what}: sine argument {np.abs(x).max():.6g} exceeds 1")
    return np.arcsin(np.clip(x, -1.0, 1.0))


def decode_angles(z_theta, z_phi, geom: ArrayGeometry):
    """Elevation from the vertical eigenvalue, then azimuth using cos(theta)."""
    lam = geom.wavelength
    theta = _asin_checked(np.arctan(z_theta) * lam / (np.pi * geom.d_v), "elevation")
    phi = _asin_checked(np.arctan(z_phi) * lam / (np.pi * geom.d_h * np.cos(theta)), "azimuth")
    return theta, phi


def pencil_run(G: np.ndarray, cfg: PencilConfig, mode: str, geom: ArrayGeometry,
               n_paths=None) -> tuple[np.ndarray, np.ndarray, np.ndarray, SubspaceBundle, EigenSolution]:
    """Real transform, subspace, three Psi matrices and joint diagonalization.

    Returns (z_third, z_theta, z_phi, subspace, eig). The angle eigenvalues are
    returned with the sign that the tangent decoders expect: the Psi built
    from the leading rows carries -tan(mu/2) for a per-index phase step mu,
    which for the spatial axes (positive phase convention) is the negative of
    tan(pi d sin(.) / lambda).
    """
    L, R, kd = cfg.L, cfg.R, cfg.kdim(mode)
    G_re = to_real_pencil(G)
    sub = signal_subspace(G_re, gamma1=cfg.gamma1, n_paths=n_paths)
    psi_k = psi_matrix(sub.U_s, selection_J(1, L, R, kd))
    psi_h = psi_matrix(sub.U_s, selection_J(2, L, R, kd), shuffle_left("h", L, R, kd))
    psi_v = psi_matrix(sub.U_s, selection_J(3, L, R, kd), shuffle_left("v", L, R, kd))
    eig = joint_diagonalize(psi_k, [psi_v, psi_h])
    z_k, z_v, z_h = eig.z
    return z_k, -z_v, -z_h, sub, eig


def _single_freq_run(snapshot, geom, grid, cfg, n_paths=None) -> RunResult:
    G = build_G3_freq(snapshot, cfg, n_paths)
    z_tau, z_th, z_ph, sub, eig = pencil_run(G, cfg, "freq", geom, n_paths)
    theta, phi = decode_angles(z_th, z_ph, geom)
    return RunResult(theta, phi, decode_delay(z_tau, grid.delta_f), sub, eig)


def match_by_angle(theta_a, phi_a, theta_b, phi_b) -> np.ndarray:
    """perm with (theta_b[perm[i]], phi_b[perm[i]]) closest to path i of A."""
    C = (np.abs(np.subtract.outer(theta_a, theta_b)) + np.abs(np.subtract.outer(phi_a, phi_b)))
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return perm


def estimate_angle_delay(snapshot_t1, snapshot_t2, timestamps, geom: ArrayGeometry,
                         grid: SamplingGrid, cfg: PencilConfig) -> AngleDelayEstimate:
    """Angles, delays at both times and delay rate from two snapshots."""
    t1, t2 = (float(t) for t in timestamps)
    if t1 == t2:
        raise PreconditionError("the two snapshots need distinct timestamps")
    a = _single_freq_run(snapshot_t1, geom, grid, cfg)
    b = _single_freq_run(snapshot_t2, geom, grid, cfg)
    if a.subspace.n_paths != b.subspace.n_paths:
        raise PathCountMismatchError(
            f"snapshots detect {a.subspace.n_paths} and {b.subspace.n_paths} paths")
    perm = match_by_angle(a.theta, a.phi, b.theta, b.phi)
    tau2 = b.third[perm]
    k_tau = (tau2 - a.third) / (t2 - t1)
    quality = {
        "offdiag_freq": max(a.eig.offdiag_residual, b.eig.offdiag_residual),
        "gap_freq": max(a.subspace.gap, b.subspace.gap),
        "angle_spread_freq": float(np.max(np.abs(a.theta - b.theta[perm])
                                          + np.abs(a.phi - b.phi[perm]))),
    }
    return AngleDelayEstimate(a.theta, a.phi, a.third, tau2, k_tau, t1, t2, quality)


def uniform_spacing(times) -> float:
    """Common spacing of the given sample times; raises if not uniform."""
    ts = np.asarray(times, dtype=float)
    if ts.size < 2:
        raise PreconditionError("at least two samples are needed")
    d = np.diff(ts)
    if np.max(np.abs(d - d[0])) > 1e-9 * abs(d[0]):
        raise PreconditionError("temporal pencil needs uniformly spaced sample times")
    return float(d[0])


def estimate_angle_doppler(slice_f1, sample_times, geom: ArrayGeometry, cfg: PencilConfig,
                           n_paths: int) -> AngleDopplerEstimate:
    """Angles and effective Doppler from the first-subcarrier samples [ant_h, ant_v, time].

    The Doppler decoder uses the actual sample spacing, so two samples taken
    5 T apart are decoded with spacing 5 T.
    """
    T_eff = uniform_spacing(sample_times)
    G = build_G3_time(slice_f1, cfg, n_paths)
    z_w, z_th, z_ph, sub, eig = pencil_run(G, cfg, "time", geom, n_paths)
    theta, phi = decode_angles(z_th, z_ph, geom)
    quality = {"offdiag_time": eig.offdiag_residual, "gap_time": sub.gap}
    return AngleDopplerEstimate(theta, phi, decode_doppler(z_w, T_eff), quality)
