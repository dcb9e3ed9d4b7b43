"""Tensor blob file format.

Binary layout, little-endian throughout:

    magic   4 bytes  b"AFPT"
    version u32      (currently 1)
    dtype   u8       0 = float32 (only code defined)
    rank    u8
    dims    u32 * rank
    payload float32 * prod(dims), row-major

Round-trips bitwise; used for attack records, fingerprints and datasets.
"""

import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

MAGIC = b"AFPT"
VERSION = 1
_DTYPE_F32 = 0


def write_blob(path: str | Path, array: np.ndarray) -> None:
    arr = np.ascontiguousarray(array, dtype=np.float32)
    if arr.ndim > 255:
        raise FormatError(f"rank {arr.ndim} exceeds blob format limit")
    header = MAGIC + struct.pack("<IBB", VERSION, _DTYPE_F32, arr.ndim)
    header += struct.pack(f"<{arr.ndim}I", *arr.shape)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as f:
        f.write(header)
        f.write(arr.astype("<f4").tobytes())


def read_blob(path: str | Path) -> np.ndarray:
    path = Path(path)
    data = path.read_bytes()
    if data[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {data[:4]!r}, expected {MAGIC!r}")
    if len(data) < 10:
        raise FormatError(f"{path}: truncated header")
    version, dtype_code, rank = struct.unpack_from("<IBB", data, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported blob version {version}")
    if dtype_code != _DTYPE_F32:
        raise FormatError(f"{path}: unknown dtype code {dtype_code}")
    offset = 10
    if len(data) < offset + 4 * rank:
        raise FormatError(f"{path}: truncated dims")
    dims = struct.unpack_from(f"<{rank}I", data, offset)
    offset += 4 * rank
    count = int(np.prod(dims, dtype=np.int64)) if rank else 1
    expected = offset + 4 * count
    if len(data) != expected:
        raise FormatError(
            f"{path}: payload length {len(data) - offset} does not match dims "
            f"{tuple(dims)} (expected {4 * count} bytes)"
        )
    payload = np.frombuffer(data, dtype="<f4", offset=offset, count=count)
    return payload.reshape(dims).copy()
