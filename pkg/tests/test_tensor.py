import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mdmp.errors import DimMismatchError, FormatError, NonFiniteError
from mdmp.synth import steering_grid
from mdmp.tensor import AxisSpec, ComplexTensor, read_cct, tensor_new, write_cct

from conftest import make_geom


def test_scalar_tensor():
    t = tensor_new([1], [1 + 0j])
    assert t.dims == (1,)
    assert t.array[0] == 1


def test_zero_tensor_norm():
    t = tensor_new([2, 2], np.zeros(4))
    assert t.norm() == 0.0


def test_length_mismatch():
    with pytest.raises(DimMismatchError):
        tensor_new([2, 3], np.zeros(5))


def test_nonfinite_rejected():
    with pytest.raises(NonFiniteError):
        tensor_new([2], [1.0, np.nan])
    with pytest.raises(NonFiniteError):
        ComplexTensor([np.inf + 0j])


def test_row_major_first_axis_slowest():
    t = tensor_new([2, 3], np.arange(6))
    assert t.array[1, 0] == 3
    assert t.array[0, 2] == 2


def test_immutable():
    t = tensor_new([2], [1, 2])
    with pytest.raises(ValueError):
        t.array[0] = 5


def test_round_trip_2x2(tmp_path):
    t = tensor_new([2, 2], [1 + 2j, -3.5 + 0j, 0.25j, 7])
    p = tmp_path / "a.cct"
    write_cct(t, AxisSpec(("ant_h", "ant_v"), (2, 2)), p)
    t2, ax = read_cct(p)
    assert ax.names == ("ant_h", "ant_v")
    assert t2.array.tobytes() == t.array.tobytes()


def test_round_trip_8x8x32(tmp_path, rng):
    x = rng.standard_normal((8, 8, 32)) + 1j * rng.standard_normal((8, 8, 32))
    t = ComplexTensor(x)
    p = tmp_path / "b.cct"
    write_cct(t, AxisSpec(("ant_h", "ant_v", "freq"), t.dims), p)
    t2, _ = read_cct(p)
    assert np.linalg.norm(t2.array - x) == 0.0


def test_header_layout(tmp_path):
    t = tensor_new([1, 2], [1 + 1j, 2 - 1j])
    p = tmp_path / "c.cct"
    write_cct(t, AxisSpec(("freq", "time"), (1, 2)), p)
    raw = p.read_bytes()
    assert raw[:4] == b"CCT1"
    assert struct.unpack("<I", raw[4:8]) == (2,)
    assert struct.unpack("<2I", raw[8:16]) == (1, 2)
    assert raw[16:18] == bytes([2, 3])
    assert np.frombuffer(raw[18:], "<f8").tolist() == [1.0, 1.0, 2.0, -1.0]


def test_bad_magic(tmp_path):
    p = tmp_path / "bad.cct"
    p.write_bytes(b"XXXX" + b"\0" * 40)
    with pytest.raises(FormatError):
        read_cct(p)


def test_truncated_and_trailing(tmp_path):
    t = tensor_new([3], [1, 2, 3])
    p = tmp_path / "t.cct"
    write_cct(t, AxisSpec(("freq",), (3,)), p)
    raw = p.read_bytes()
    p.write_bytes(raw[:-8])
    with pytest.raises(FormatError):
        read_cct(p)
    p.write_bytes(raw + b"\0")
    with pytest.raises(FormatError):
        read_cct(p)


def test_axis_size_mismatch(tmp_path):
    with pytest.raises(DimMismatchError):
        write_cct(tensor_new([2], [1, 2]), AxisSpec(("freq",), (3,)), tmp_path / "x")


@settings(max_examples=40, deadline=None)
@given(dims=st.lists(st.integers(1, 16), min_size=1, max_size=4), seed=st.integers(0, 2**32 - 1))
def test_round_trip_property(tmp_path_factory, dims, seed):
    r = np.random.default_rng(seed)
    x = r.standard_normal(dims) + 1j * r.standard_normal(dims)
    names = ("ant_h", "ant_v", "freq", "time")[: len(dims)]
    p = tmp_path_factory.mktemp("rt") / "x.cct"
    write_cct(ComplexTensor(x), AxisSpec(names, dims), p)
    y, ax = read_cct(p)
    assert ax.sizes == tuple(dims)
    assert y.array.tobytes() == x.astype(np.complex128).tobytes()


def test_antenna_flattening_vertical_fastest():
    geom = make_geom(3, 4)
    th, ph = 0.3, -0.7
    grid = steering_grid(geom, th, ph)          # [ant_h, ant_v]
    flat = ComplexTensor(grid).flat()
    lam = geom.wavelength
    a_h = np.exp(2j * np.pi * geom.d_h * np.cos(th) * np.sin(ph) / lam)
    a_v = np.exp(2j * np.pi * geom.d_v * np.sin(th) / lam)
    for sh in range(3):
        for sv in range(4):
            assert abs(flat[sh * 4 + sv] - a_h**sh * a_v**sv) < 1e-12
