import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import minimize_scalar

from mdmp.bounds import (
    F1,
    F2,
    BoundInputs,
    F1_raw,
    F2_raw,
    brute_force_bound_oracle,
    f1_points,
    lower_bound_Nt,
)
from mdmp.errors import ConstraintViolationError


def test_calN_calQ():
    inp = BoundInputs(8, 8, 4, 4)
    assert inp.cal_q == 4.0 and inp.cal_n == 1.0
    assert BoundInputs(8, 8, 6, 20).cal_q == 4.0
    assert BoundInputs(8, 8, 6, 30).cal_q == 6.0
    assert BoundInputs(8, 8, 6, 30).cal_n == 2.0


def test_F1_examples():
    inp = BoundInputs(8, 8, 4, 4)
    assert F1(2, 2, inp) == pytest.approx(1 / 7 + 1, abs=1e-12)
    assert F1(3, 8, inp) == pytest.approx(inp.cal_n + 3 - 1)
    with pytest.raises(ConstraintViolationError):
        F1(1, 4, inp)
    with pytest.raises(ConstraintViolationError):
        F1(2, 1.5, inp)


def test_F2_examples():
    inp = BoundInputs(8, 8, 4, 4)
    assert F2(2, inp) == pytest.approx(4 / 35 + 1 - 1)
    with pytest.raises(ConstraintViolationError):
        F2(9, inp)


def test_invalid_inputs():
    with pytest.raises(ConstraintViolationError):
        BoundInputs(8, 3, 4, 4)
    with pytest.raises(ConstraintViolationError):
        BoundInputs(8, 8, 1, 4)
    with pytest.raises(ConstraintViolationError):
        BoundInputs(8, 8, 4, 0)


def test_F2_convex():
    inp = BoundInputs(8, 16, 5, 7)
    R = np.linspace(2, 8, 201)
    v = F2_raw(R, inp)
    assert np.all(np.diff(v, 2) > -1e-12)


def test_report_example():
    rep = lower_bound_Nt(BoundInputs(8, 8, 3, 4))
    labels = {e[0] for e in rep.extreme_points}
    assert {"P3", "P4"} <= labels
    for lab, L, R, _ in rep.extreme_points:
        if lab in ("P3", "P4"):
            assert (L, R) == (2.0, 2.0)
    assert rep.f1 == pytest.approx(8 * (1 / 7 + 1))
    assert rep.bound == max(rep.f1, rep.f2)
    assert any("skipped" in n for n in rep.notes)


def test_report_to_dict():
    d = lower_bound_Nt(BoundInputs(8, 8, 4, 4)).to_dict()
    assert d["schema"] == "mdmp.bound_report/1"
    assert d["bound"] == max(d["f1"], d["f2"])


def test_p2_skipped_when_calQ_equals_calN():
    inp = BoundInputs(8, 5, 4, 4)     # calN = 2, calQ = 4
    assert any(p[0] == "P2" for p in f1_points(inp))
    inp = BoundInputs(8, 4, 4, 4)     # calN = 4, calQ = 4
    assert not any(p[0] == "P2" for p in f1_points(inp))


def reduced_F1(R, inp):
    return F1_raw(inp.cal_q / R, R, inp)


def test_f1_stationary_points_reduced_gradient():
    """Along the active constraint L R = calQ, the first two points are stationary."""
    for inp in (BoundInputs(8, 8, 3, 4), BoundInputs(16, 12, 4, 30), BoundInputs(32, 20, 6, 60)):
        h = 1e-5
        for label, L, R in f1_points(inp)[:2]:
            assert L * R == pytest.approx(inp.cal_q)
            g = (reduced_F1(R + h, inp) - reduced_F1(R - h, inp)) / (2 * h)
            assert abs(g) < 1e-6, label


def test_f2_corrected_root():
    """dF2/dR vanishes at R = (sqrt(n)(N_v+1) + sqrt(Q)) / (sqrt(n) + sqrt(Q))."""
    inp = BoundInputs(8, 8, 3, 4)
    n, q = inp.n_s - inp.q + 1, inp.q
    R = (math.sqrt(n) * (inp.n_v + 1) + math.sqrt(q)) / (math.sqrt(n) + math.sqrt(q))
    h = 1e-5
    assert abs((F2_raw(R + h, inp) - F2_raw(R - h, inp)) / (2 * h)) < 1e-8


def f1_oracle(inp):
    """Numerical maximum of F1 on the active curve L = calQ / R within L >= 2, 2 <= R <= N_v."""
    lo, hi = 2.0, min(float(inp.n_v), inp.cal_q / 2)
    if hi < lo:
        return math.nan
    res = minimize_scalar(lambda R: -reduced_F1(R, inp), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return inp.n_v * max(-res.fun, reduced_F1(lo, inp), reduced_F1(hi, inp))


@pytest.mark.parametrize("args", [(8, 8, 3, 4), (8, 8, 4, 4), (16, 12, 4, 30), (32, 20, 6, 60),
                                  (4, 16, 8, 5), (12, 6, 2, 9)])
def test_f1_matches_optimizer(args):
    inp = BoundInputs(*args)
    assert lower_bound_Nt(inp).f1 == pytest.approx(f1_oracle(inp), abs=1e-6)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 24), st.integers(2, 24), st.integers(1, 40), st.data())
def test_bound_is_max_and_f1_oracle(n_v, n_s, p, data):
    q = data.draw(st.integers(2, n_s))
    inp = BoundInputs(n_v, n_s, q, p)
    rep = lower_bound_Nt(inp)
    assert rep.bound == max(v for v in (rep.f1, rep.f2) if not math.isnan(v))
    assert rep.f1 == pytest.approx(f1_oracle(inp), abs=1e-6)


def test_brute_force_examples():
    assert brute_force_bound_oracle(BoundInputs(8, 8, 4, 1), 20) == 2
    assert brute_force_bound_oracle(BoundInputs(8, 8, 4, 4), 1) is None
    inp = BoundInputs(8, 8, 4, 4)
    bf = brute_force_bound_oracle(inp, 50)
    assert bf >= math.ceil(lower_bound_Nt(inp).bound / inp.n_v)
