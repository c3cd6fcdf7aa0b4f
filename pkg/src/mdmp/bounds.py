"""Antenna-count lower bound for the temporal pencil, in closed form and by search.

With calN = max(Q/(N_s-Q+1), 1) and calQ = max(P/(Q-1), 4):

    F1(L, R) = calN/(N_v-R+1) + L - 1          on LR >= calQ, L >= 2, 2 <= R <= N_v
    F2(R)    = P/((N_s-Q+1)(N_v-R+1)) + P/((R-1)Q) - 1    on 2 <= R <= N_v

The bound on N_t is max(f1, f2) where f1 is N_v times the largest F1 over a
fixed set of candidate points and f2 comes from four R regimes. All arithmetic
is on real-valued L and R; ``brute_force_bound_oracle`` does the integer search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConstraintViolationError

_TOL = 1e-9


@dataclass(frozen=True)
class BoundInputs:
    n_v: int
    n_s: int
    q: int
    p: int

    def __post_init__(self):
        for name in ("n_v", "n_s", "q", "p"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ConstraintViolationError(f"{name} must be a positive integer, got {v}")
        if self.q > self.n_s:
            raise ConstraintViolationError(f"Q <= N_s violated (Q={self.q}, N_s={self.n_s})")
        if self.q < 2:
            raise ConstraintViolationError("Q >= 2 required (P/(Q-1) is undefined for Q=1)")

    @property
    def cal_n(self) -> float:
        return max(self.q / (self.n_s - self.q + 1), 1.0)

    @property
    def cal_q(self) -> float:
        return max(self.p / (self.q - 1), 4.0)


@dataclass
class BoundReport:
    f1: float
    f2: float
    bound: float
    extreme_points: list = field(default_factory=list)   # (label, L, R, value)
    regimes: list = field(default_factory=list)          # (label, value)
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or (isinstance(x, float) and math.isnan(x)) else x
        return {
            "schema": "mdmp.bound_report/1",
            "f1": num(self.f1), "f2": num(self.f2), "bound": num(self.bound),
            "extreme_points": [{"label": a, "L": num(b), "R": num(c), "value": num(d)}
                               for a, b, c, d in self.extreme_points],
            "regimes": [{"label": a, "value": num(b)} for a, b in self.regimes],
            "notes": list(self.notes),
        }


def F1_violations(L, R, inp: BoundInputs) -> list:
    bad = []
    if L * R < inp.cal_q * (1 - _TOL):
        bad.append(f"L*R >= calQ violated ({L * R:.6g} < {inp.cal_q:.6g})")
    if L < 2 - _TOL:
        bad.append(f"L >= 2 violated (L={L:.6g})")
    if not 2 - _TOL <= R <= inp.n_v + _TOL:
        bad.append(f"N_v >= R >= 2 violated (R={R:.6g}, N_v={inp.n_v})")
    return bad


def F1(L: float, R: float, inp: BoundInputs) -> float:
    bad = F1_violations(L, R, inp)
    if bad:
        raise ConstraintViolationError("; ".join(bad))
    return F1_raw(L, R, inp)


def F1_raw(L, R, inp: BoundInputs):
    """F1 without domain checks (used for derivatives)."""
    return inp.cal_n / (inp.n_v - R + 1) + L - 1


def F2_violations(R, inp: BoundInputs, L=None) -> list:
    bad = []
    if not 2 - _TOL <= R <= inp.n_v + _TOL:
        bad.append(f"N_v >= R >= 2 violated (R={R:.6g}, N_v={inp.n_v})")
    if L is not None and R > 1 and L * inp.q < max(inp.p / (R - 1), 4.0) * (1 - _TOL):
        bad.append(f"L*Q >= max(P/(R-1), 4) violated (L={L:.6g})")
    return bad


def F2(R: float, inp: BoundInputs, L=None) -> float:
    bad = F2_violations(R, inp, L)
    if bad:
        raise ConstraintViolationError("; ".join(bad))
    return F2_raw(R, inp)


def F2_raw(R, inp: BoundInputs):
    n = inp.n_s - inp.q + 1
    return inp.p / (n * (inp.n_v - R + 1)) + inp.p / ((R - 1) * inp.q) - 1


def f1_points(inp: BoundInputs) -> list:
    """Candidate (label, L, R) points for the F1 maximum."""
    sN, sQ = math.sqrt(inp.cal_n), math.sqrt(inp.cal_q)
    nv1 = inp.n_v + 1
    pts = [("P1", sQ * (sN + sQ) / nv1, sQ / (sN + sQ) * nv1)]
    if not math.isclose(inp.cal_q, inp.cal_n):
        pts.append(("P2", sQ * (sQ - sN) / nv1, sQ / (sQ - sN) * nv1))
    pts += [("P3", 2.0, inp.cal_q / 2), ("P4", inp.cal_q / 2, 2.0),
            ("P5", inp.cal_q / inp.n_v, float(inp.n_v))]
    return pts


def f2_candidates(inp: BoundInputs) -> list:
    """Candidate (label, R) points for the F2 maximum in the fourth regime."""
    n, q = inp.n_s - inp.q + 1, inp.q
    sn, sq = math.sqrt(n), math.sqrt(q)
    nv1 = inp.n_v + 1
    mid = (inp.n_s + 1) / 2
    if math.isclose(q, mid):
        return [("R=(N_v+1)/2", nv1 / 2)]
    R6 = sn * nv1 / (sn + sq)
    R7 = sn * nv1 / (sn - sq)
    pts = [("max(2,R6)", max(2.0, R6)), ("max(2,R7)", max(2.0, R7))]
    if q < mid:
        pts.append(("N_v", float(inp.n_v)))
    return pts


def _snap(x, lo, hi):
    """Pull values within tolerance of a box edge onto it."""
    if lo - _TOL <= x < lo:
        return lo
    if hi < x <= hi + _TOL:
        return hi
    return x


def lower_bound_Nt(inp: BoundInputs) -> BoundReport:
    if inp.n_v < 2:
        raise ConstraintViolationError("N_v >= 2 required (R ranges over [2, N_v])")
    rep = BoundReport(math.nan, math.nan, math.nan)
    vals = []
    for label, L, R in f1_points(inp):
        R = _snap(R, 2.0, float(inp.n_v))
        L = max(L, 2.0) if L >= 2 - _TOL else L
        bad = F1_violations(L, R, inp)
        if bad:
            rep.notes.append(f"{label} (L={L:.6g}, R={R:.6g}) skipped: " + "; ".join(bad))
            continue
        v = F1_raw(L, R, inp)
        rep.extreme_points.append((label, L, R, v))
        vals.append(v)
    rep.f1 = inp.n_v * max(vals) if vals else math.nan

    nv, P, ns, q = inp.n_v, inp.p, inp.n_s, inp.q
    A, B = nv - P + 1, P / 4 + 1
    regimes = []
    if max(B, 2) <= min(A, nv):
        regimes.append(("i", nv * (1 / (ns - 1) + 1)))
    if 2 <= min(A, B, nv):
        regimes.append(("ii", nv * (1 / (ns - q + 1) + P / q - 1)))
    if max(A, B, 2) <= nv:
        regimes.append(("iii", nv * (P / (ns - 1) + 1)))
    if max(A, 2) < min(P, nv + 1):
        f2v = []
        for label, R in f2_candidates(inp):
            R = _snap(R, 2.0, float(nv))
            bad = F2_violations(R, inp)
            if bad:
                rep.notes.append(f"F2 candidate {label} (R={R:.6g}) skipped: " + "; ".join(bad))
                continue
            v = F2_raw(R, inp)
            rep.extreme_points.append((f"F2:{label}", None, R, v))
            f2v.append(v)
        if f2v:
            regimes.append(("iv", nv * max(f2v)))
        else:
            rep.notes.append("regime iv has no admissible candidate")
    if len(regimes) > 1:
        rep.notes.append("several R regimes apply: " + ",".join(r for r, _ in regimes)
                         + "; f2 is their maximum")
    rep.regimes = regimes
    rep.f2 = max(v for _, v in regimes) if regimes else math.nan
    finite = [v for v in (rep.f1, rep.f2) if not math.isnan(v)]
    rep.bound = max(finite) if finite else math.nan
    return rep


def integer_feasible(inp: BoundInputs, n_h: int, L: int, R: int) -> bool:
    """All temporal rank inequalities plus the two relaxation domains."""
    P, Q, nv, ns = inp.p, inp.q, inp.n_v, inp.n_s
    if not (2 <= L <= n_h and 2 <= R <= nv):
        return False
    return (L * R * (Q - 1) >= P and L * Q * (R - 1) >= P and R * Q * (L - 1) >= P
            and (n_h - L + 1) * (nv - R + 1) * (ns - Q + 1) >= P
            and L * R >= inp.cal_q and L * Q >= max(P / (R - 1), 4))


def brute_force_bound_oracle(inp: BoundInputs, n_h_max: int):
    """Smallest integer N_h admitting some integer (L, R); None if none up to n_h_max."""
    for n_h in range(1, n_h_max + 1):
        for L in range(2, n_h + 1):
            for R in range(2, inp.n_v + 1):
                if integer_feasible(inp, n_h, L, R):
                    return n_h
    return None
