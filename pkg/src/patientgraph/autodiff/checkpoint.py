"""
Binary parameter checkpoints.

Layout (all integers little-endian):
    b"PGCK"  magic
    uint32   format version
    uint32   parameter count
    per parameter, in insertion order:
        uint32  name length, then UTF-8 name bytes
        uint32  ndim, then ndim x uint64 dims
        float64 values, little-endian, row-major
"""

from __future__ import annotations

import struct
from collections.abc import Mapping
from pathlib import Path

import numpy as np

from patientgraph.autodiff.tensor import FloatArray
from patientgraph.errors import DataError

MAGIC = b"PGCK"
FORMAT_VERSION = 1


def encode_checkpoint(params: Mapping[str, FloatArray]) -> bytes:
    chunks = [MAGIC, struct.pack("<II", FORMAT_VERSION, len(params))]
    for name, value in params.items():
        arr = np.ascontiguousarray(value, dtype="<f8")
        raw_name = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw_name)))
        chunks.append(raw_name)
        chunks.append(struct.pack("<I", arr.ndim))
        chunks.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        chunks.append(arr.tobytes())
    return b"".join(chunks)


def decode_checkpoint(blob: bytes) -> dict[str, FloatArray]:
    if blob[:4] != MAGIC:
        raise DataError("not a checkpoint file (bad magic)")
    if len(blob) < 12:
        raise DataError(f"truncated checkpoint: {len(blob)} bytes")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint version {version}")
    pos = 12
    out: dict[str, FloatArray] = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            name = blob[pos : pos + name_len].decode("utf-8")
            pos += name_len
            (ndim,) = struct.unpack_from("<I", blob, pos)
            pos += 4
            shape = struct.unpack_from(f"<{ndim}Q", blob, pos)
            pos += 8 * ndim
            size = int(np.prod(shape, dtype=np.int64))
            values = np.frombuffer(blob, dtype="<f8", count=size, offset=pos)
            pos += 8 * size
            out[name] = values.astype(np.float64).reshape(shape)
    except (struct.error, ValueError) as exc:
        raise DataError(f"truncated checkpoint: {exc}") from exc
    if pos != len(blob):
        raise DataError(f"checkpoint has {len(blob) - pos} trailing bytes")
    return out


def save_checkpoint(path: Path, params: Mapping[str, FloatArray]) -> None:
    path.write_bytes(encode_checkpoint(params))


def load_checkpoint(path: Path) -> dict[str, FloatArray]:
    return decode_checkpoint(path.read_bytes())
