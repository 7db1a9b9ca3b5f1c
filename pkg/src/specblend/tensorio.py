"""VLT1 tensor files and seeded Gaussian sampling.

File layout (all little-endian)::

    b"VLT1" | dtype u8 | ndim u8 | ndim x u64 axis lengths | row-major payload

dtype codes: 0 = float32, 1 = float64, 2 = complex64 (interleaved float32
re/im pairs).
"""
from __future__ import annotations

import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DimensionError,
    FormatError,
    LengthMismatchError,
    UnsupportedDtypeError,
)

MAGIC = b"VLT1"

_CODE_TO_DTYPE = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<c8"),
}
_KIND_TO_CODE = {"float32": 0, "float64": 1, "complex64": 2}


def dtype_code(arr: np.ndarray) -> int:
    name = arr.dtype.name
    if name == "bool":
        return 0
    if name == "complex128":
        return 2
    try:
        return _KIND_TO_CODE[name]
    except KeyError:
        raise UnsupportedDtypeError(f"cannot store dtype {name} in VLT1") from None


def encode_tensor(arr) -> bytes:
    """Serialize ``arr`` to VLT1 bytes.

    Booleans are stored as float32 0/1 and complex128 is narrowed to complex64.
    """
    arr = np.asarray(arr)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim > 255:
        raise DimensionError("VLT1 supports at most 255 axes")
    code = dtype_code(arr)
    payload = np.ascontiguousarray(arr, dtype=_CODE_TO_DTYPE[code])
    header = MAGIC + struct.pack("<BB", code, arr.ndim) + struct.pack(f"<{arr.ndim}Q", *arr.shape)
    return header + payload.tobytes()


def decode_tensor(buf: bytes) -> np.ndarray:
    if buf[:4] != MAGIC:
        raise FormatError(f"bad magic {buf[:4]!r}: expected {MAGIC.decode()!r}")
    if len(buf) < 6:
        raise LengthMismatchError("header truncated after magic")
    code, ndim = struct.unpack_from("<BB", buf, 4)
    if code not in _CODE_TO_DTYPE:
        raise UnsupportedDtypeError(f"unknown dtype code {code}")
    if ndim == 0:
        raise FormatError("tensor has no axes")
    end = 6 + 8 * ndim
    if len(buf) < end:
        raise LengthMismatchError(f"header truncated: need {end} bytes, have {len(buf)}")
    dims = struct.unpack_from(f"<{ndim}Q", buf, 6)
    if any(d < 1 for d in dims):
        raise FormatError(f"axis lengths must be >= 1, got {list(dims)}")
    dtype = _CODE_TO_DTYPE[code]
    count = int(np.prod(dims, dtype=np.uint64))
    expected = count * dtype.itemsize
    have = len(buf) - end
    if have != expected:
        raise LengthMismatchError(
            f"payload has {have} bytes ({have // dtype.itemsize} elements), "
            f"header declares {count} elements ({expected} bytes)"
        )
    return np.frombuffer(buf, dtype=dtype, offset=end).reshape(dims).astype(dtype.newbyteorder("="))


def write_tensor(arr, path) -> None:
    """Write ``arr`` atomically: a temp file in the target directory is renamed on success."""
    data = encode_tensor(arr)
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_tensor(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_tensor(fh.read())


@dataclass(frozen=True)
class RngSpec:
    """Seed plus generator name.

    Streams for different purposes (noise, weights, permutations, ...) are
    derived with :meth:`generator` keys so they never overlap.
    """

    seed: int = 0
    algorithm: str = "numpy-PCG64+SeedSequence"

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def generator(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))


def check_dims(dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"dims must be a non-empty list of positive lengths, got {list(dims)}")
    return dims


def sample_gaussian(dims, rng: RngSpec, *key: int) -> np.ndarray:
    """i.i.d. standard normal float32 draws, reproducible from ``rng``."""
    dims = check_dims(dims)
    return rng.generator(*key).standard_normal(dims, dtype=np.float32)
