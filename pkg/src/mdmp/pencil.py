"""Three-level block-Hankel pencil matrices, shuffles and selections.

For a tensor X[h, v, k] (k is frequency or time) and window sizes (L, R, K),
the pencil matrix has

    row (k, r, l) -> index k*R*L + r*L + l          (l fastest)
    col (c_k, c_v, c_h) -> index c_k*(Nh-L+1)*(Nv-R+1) + c_v*(Nh-L+1) + c_h
    entry = X[c_h + l, c_v + r, c_k + k]

so it is built by a single gather of precomputed flat offsets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasiblePencilError
from .tensor import as_array


@dataclass(frozen=True)
class PencilConfig:
    L: int
    R: int
    K: int
    Q: int
    gamma1: float = 1e-3

    def kdim(self, mode: str) -> int:
        if mode == "freq":
            return self.K
        if mode == "time":
            return self.Q
        raise ValueError(f"mode must be 'freq' or 'time', got {mode!r}")


@dataclass(frozen=True)
class IndexMap:
    rows: np.ndarray
    cols: np.ndarray
    shape: tuple   # source tensor shape

    def gather(self, x: np.ndarray) -> np.ndarray:
        flat = np.asarray(x).reshape(-1)
        return flat[self.rows[:, None] + self.cols[None, :]]


@dataclass
class FeasibilityReport:
    ok: bool
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def index_map(n_h: int, n_v: int, n_k: int, L: int, R: int, K: int) -> IndexMap:
    s_h, s_v = n_v * n_k, n_k
    kk, rr, ll = np.meshgrid(np.arange(K), np.arange(R), np.arange(L), indexing="ij")
    rows = (ll * s_h + rr * s_v + kk).reshape(-1)
    ck, cv, ch = np.meshgrid(np.arange(n_k - K + 1), np.arange(n_v - R + 1),
                             np.arange(n_h - L + 1), indexing="ij")
    cols = (ch * s_h + cv * s_v + ck).reshape(-1)
    return IndexMap(rows.astype(np.intp), cols.astype(np.intp), (n_h, n_v, n_k))


def feasibility_check(cfg: PencilConfig, n_h: int, n_v: int, n_fs: int, p: int,
                      mode: str = "freq") -> FeasibilityReport:
    """Check the window bounds and the four rank inequalities for P paths."""
    L, R = cfg.L, cfg.R
    K = cfg.kdim(mode)
    sym = "K" if mode == "freq" else "Q"
    nsym = "N_f" if mode == "freq" else "N_s"
    bad = []
    if not 2 <= L < n_h:
        bad.append(f"2 <= L < N_h violated (L={L}, N_h={n_h})")
    if not 2 <= R < n_v:
        bad.append(f"2 <= R < N_v violated (R={R}, N_v={n_v})")
    if not 2 <= K <= n_fs:
        bad.append(f"2 <= {sym} <= {nsym} violated ({sym}={K}, {nsym}={n_fs})")
    checks = [
        (L * R * (K - 1), f"L*R*({sym}-1) >= P"),
        (L * K * (R - 1), f"L*{sym}*(R-1) >= P"),
        (R * K * (L - 1), f"R*{sym}*(L-1) >= P"),
        ((n_h - L + 1) * (n_v - R + 1) * (n_fs - K + 1),
         f"(N_h-L+1)*(N_v-R+1)*({nsym}-{sym}+1) >= P"),
    ]
    for lhs, text in checks:
        if lhs < p:
            bad.append(f"{text} violated ({lhs} < {p})")
    return FeasibilityReport(not bad, bad)


def _build(x: np.ndarray, cfg: PencilConfig, mode: str, n_paths) -> np.ndarray:
    if x.ndim != 3:
        raise ValueError(f"expected a 3-axis tensor, got shape {x.shape}")
    n_h, n_v, n_k = x.shape
    rep = feasibility_check(cfg, n_h, n_v, n_k, 1 if n_paths is None else n_paths, mode)
    if not rep.ok:
        raise InfeasiblePencilError("; ".join(rep.violations))
    imap = index_map(n_h, n_v, n_k, cfg.L, cfg.R, cfg.kdim(mode))
    return imap.gather(x)


def build_G3_freq(snapshot, cfg: PencilConfig, n_paths=None) -> np.ndarray:
    """Pencil matrix (L R K) x ((Nh-L+1)(Nv-R+1)(Nf-K+1)) of a [ant_h, ant_v, freq] snapshot."""
    return _build(as_array(snapshot), cfg, "freq", n_paths)


def build_G3_time(slice_f1, cfg: PencilConfig, n_paths=None) -> np.ndarray:
    """Pencil matrix (L R Q) x ((Nh-L+1)(Nv-R+1)(Ns-Q+1)) of a [ant_h, ant_v, time] slice."""
    return _build(as_array(slice_f1), cfg, "time", n_paths)


def shuffle_left(axis: str, L: int, R: int, kdim: int) -> np.ndarray:
    """Row permutation moving the horizontal ('h') or vertical ('v') index slowest.

    ``x[perm]`` reorders pencil rows from (k, r, l) to (l, k, r) for 'h' and
    to (r, k, l) for 'v'.
    """
    k, r, l = np.arange(kdim), np.arange(R), np.arange(L)
    if axis == "h":
        ll, kk, rr = np.meshgrid(l, k, r, indexing="ij")
    elif axis == "v":
        rr, kk, ll = np.meshgrid(r, k, l, indexing="ij")
    else:
        raise ValueError("axis must be 'h' or 'v'")
    return (kk * R * L + rr * L + ll).reshape(-1)


@dataclass(frozen=True)
class Selection:
    size: int
    count: int

    @property
    def first(self) -> slice:
        return slice(0, self.count)

    @property
    def second(self) -> slice:
        return slice(self.size - self.count, self.size)


def selection_J(which: int, L: int, R: int, kdim: int) -> Selection:
    """Leading-row selector: 1 drops one shift along k, 2 along h, 3 along v."""
    size = L * R * kdim
    if which == 1:
        count = (kdim - 1) * R * L
    elif which == 2:
        count = kdim * R * (L - 1)
    elif which == 3:
        count = kdim * L * (R - 1)
    else:
        raise ValueError("which must be 1, 2 or 3")
    return Selection(size, count)
