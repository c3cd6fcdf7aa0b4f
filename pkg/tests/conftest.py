import numpy as np
import pytest

from mdmp.synth import ArrayGeometry, PathTruth, SamplingGrid

F_C = 3.5e9
DF = 30e3
T = 0.5e-3


def make_geom(n_h=8, n_v=8, dv=0.8, dh=0.5):
    return ArrayGeometry.from_wavelengths(n_v, n_h, dv, dh, F_C)


def make_grid(n_f=32, n_s=8, step=1, f1=None):
    if f1 is None:
        f1 = F_C - (n_f // 2) * DF
    return SamplingGrid(f1, DF, n_f, T, tuple(i * step * T for i in range(n_s)))


def random_paths(rng, n, theta_max=0.5, phi_max=1.0, sep=0.1, w_max=350.0, static=False):
    """Paths with distinct angles, velocity-consistent k_tau and unit gains."""
    angles = []
    while len(angles) < n:
        th, ph = rng.uniform(-theta_max, theta_max), rng.uniform(-phi_max, phi_max)
        if all(abs(th - a) + abs(ph - b) >= sep for a, b in angles):
            angles.append((th, ph))
    out = []
    for th, ph in angles:
        w = 0.0 if static else rng.uniform(-w_max, w_max)
        out.append(PathTruth(th, ph, rng.uniform(0.1e-6, 3e-6), -w / F_C, w,
                             np.exp(2j * np.pi * rng.random())))
    return out


def sort_key(theta, phi):
    return np.lexsort((phi, theta))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def record_criterion(n, ok, detail):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
