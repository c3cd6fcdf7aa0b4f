"""Dense complex tensors and the CCT1 binary format.

Layout is row-major with the first axis varying slowest. Channel snapshots use
``[ant_h, ant_v, freq]`` so that flattening the two antenna axes gives the flat
antenna index ``s_h * n_v + s_v`` (vertical index fastest).

CCT1 layout (all little-endian)::

    b"CCT1" | u32 naxes | u32 size * naxes | u8 axis code * naxes | f64 (re, im) * n
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatchError, FormatError, NonFiniteError

MAGIC = b"CCT1"
AXIS_CODES = {"ant_v": 0, "ant_h": 1, "freq": 2, "time": 3}
AXIS_NAMES = {v: k for k, v in AXIS_CODES.items()}


class ComplexTensor:
    """Immutable dense complex128 array with validated dims."""

    __slots__ = ("_data",)

    def __init__(self, array):
        arr = np.array(array, dtype=np.complex128, order="C", copy=True)
        if arr.ndim == 0:
            arr = arr.reshape(1)
        if any(d < 1 for d in arr.shape):
            raise DimMismatchError(f"all dims must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("tensor contains NaN or Inf entries")
        arr.setflags(write=False)
        self._data = arr

    @property
    def array(self) -> np.ndarray:
        return self._data

    @property
    def dims(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def ndim(self) -> int:
        return self._data.ndim

    def flat(self) -> np.ndarray:
        return self._data.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self._data.reshape(-1)))

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._data
        return self._data.astype(dtype)

    def __getitem__(self, idx):
        return self._data[idx]

    def __eq__(self, other):
        if not isinstance(other, ComplexTensor):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self._data, other._data)

    def __hash__(self):
        return hash((self.dims, self._data.tobytes()))

    def __repr__(self):
        return f"ComplexTensor(dims={self.dims})"


def tensor_new(dims: Sequence[int], data) -> ComplexTensor:
    """Build a tensor from a dim list and flat row-major data."""
    dims = tuple(int(d) for d in dims)
    flat = np.asarray(data, dtype=np.complex128).reshape(-1)
    if any(d < 1 for d in dims):
        raise DimMismatchError(f"dims must be positive integers, got {dims}")
    if int(np.prod(dims)) != flat.size:
        raise DimMismatchError(f"product of dims {dims} != data length {flat.size}")
    return ComplexTensor(flat.reshape(dims))


def as_array(x) -> np.ndarray:
    if isinstance(x, ComplexTensor):
        return x.array
    return np.asarray(x, dtype=np.complex128)


@dataclass(frozen=True)
class AxisSpec:
    names: tuple[str, ...]
    sizes: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        if len(self.names) != len(self.sizes):
            raise DimMismatchError("axis names and sizes differ in length")
        for n in self.names:
            if n not in AXIS_CODES:
                raise ValueError(f"unknown axis label {n!r}")


SNAPSHOT_AXES = ("ant_h", "ant_v", "freq")
TRAJECTORY_AXES = ("ant_h", "ant_v", "freq", "time")


def write_cct(tensor: ComplexTensor, axes: AxisSpec, path) -> None:
    arr = as_array(tensor)
    if tuple(arr.shape) != axes.sizes:
        raise DimMismatchError(f"tensor dims {arr.shape} != axis sizes {axes.sizes}")
    head = MAGIC + struct.pack("<I", arr.ndim)
    head += struct.pack(f"<{arr.ndim}I", *arr.shape)
    head += bytes(AXIS_CODES[n] for n in axes.names)
    body = np.ascontiguousarray(arr).view(np.float64).astype("<f8", copy=False).tobytes()
    with open(os.fspath(path), "wb") as fh:
        fh.write(head)
        fh.write(body)


def read_cct(path) -> tuple[ComplexTensor, AxisSpec]:
    with open(os.fspath(path), "rb") as fh:
        raw = fh.read()
    if len(raw) < 8 or raw[:4] != MAGIC:
        raise FormatError("bad magic, not a CCT1 file")
    (naxes,) = struct.unpack_from("<I", raw, 4)
    if naxes == 0 or naxes > 32:
        raise FormatError(f"implausible axis count {naxes}")
    pos = 8
    need = pos + 4 * naxes + naxes
    if len(raw) < need:
        raise FormatError("truncated header")
    sizes = struct.unpack_from(f"<{naxes}I", raw, pos)
    pos += 4 * naxes
    codes = raw[pos:pos + naxes]
    pos += naxes
    try:
        names = tuple(AXIS_NAMES[c] for c in codes)
    except KeyError as exc:
        raise FormatError(f"unknown axis code {exc.args[0]}") from None
    n = int(np.prod(sizes))
    if len(raw) - pos != 16 * n:
        raise FormatError(f"payload has {len(raw) - pos} bytes, expected {16 * n}")
    vals = np.frombuffer(raw, dtype="<f8", count=2 * n, offset=pos)
    arr = vals.astype(np.float64).view(np.complex128).reshape(sizes)
    return ComplexTensor(arr), AxisSpec(names, sizes)
