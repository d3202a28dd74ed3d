"""Binary weight files.

Layout (all integers little-endian):

    magic   4 bytes  "G9W1"
    version u16      currently 1
    count   u16      number of tensor records
    record  kind u8, rank u8, dims u32 * rank, payload f32 * prod(dims)

Each record is one tensor tagged with the kind of layer it belongs to
(1 = convolution, 2 = batch norm, 3 = fully connected); record order is
the network's own topological order.  Payloads are raw little-endian
float32, so a round trip is bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"G9W1"
VERSION = 1

KIND_CONV = 1
KIND_BN = 2
KIND_FC = 3
_KNOWN_KINDS = {KIND_CONV, KIND_BN, KIND_FC}

_MAX_RANK = 8
_MAX_DIM = 1 << 28


class WeightFormatError(ValueError):
    code = "bad_format"


class BadMagic(WeightFormatError):
    code = "bad_magic"


class TruncatedPayload(WeightFormatError):
    code = "truncated_payload"


class ShapeTableMismatch(WeightFormatError):
    code = "shape_mismatch"


def save_weights(records, dest) -> None:
    """records: iterable of (kind, array); arrays must be float32."""
    records = list(records)
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HH", VERSION, len(records))
    for kind, arr in records:
        if kind not in _KNOWN_KINDS:
            raise ValueError(f"unknown record kind {kind}")
        arr = np.asarray(arr)
        if arr.dtype != np.float32:
            raise ValueError(f"weights must be float32, got {arr.dtype}")
        if arr.ndim < 1 or arr.ndim > _MAX_RANK:
            raise ValueError(f"unsupported tensor rank {arr.ndim}")
        out += struct.pack("<BB", kind, arr.ndim)
        out += struct.pack(f"<{arr.ndim}I", *arr.shape)
        out += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    Path(dest).write_bytes(bytes(out))


def load_weights(src) -> list[tuple[int, np.ndarray]]:
    """Returns the (kind, float32 array) records in file order."""
    data = Path(src).read_bytes()
    if len(data) < 4 or data[:4] != MAGIC:
        raise BadMagic(f"{src}: not a weight file (bad magic)")
    if len(data) < 8:
        raise TruncatedPayload(f"{src}: header cut short")
    version, count = struct.unpack_from("<HH", data, 4)
    if version != VERSION:
        raise WeightFormatError(f"{src}: unsupported format version {version}")
    pos = 8
    records = []
    for i in range(count):
        if pos + 2 > len(data):
            raise TruncatedPayload(f"{src}: record {i} header cut short")
        kind, rank = struct.unpack_from("<BB", data, pos)
        pos += 2
        if kind not in _KNOWN_KINDS:
            raise WeightFormatError(f"{src}: record {i} has unknown kind {kind}")
        if not 1 <= rank <= _MAX_RANK:
            raise WeightFormatError(f"{src}: record {i} has unsupported rank {rank}")
        if pos + 4 * rank > len(data):
            raise TruncatedPayload(f"{src}: record {i} shape cut short")
        dims = struct.unpack_from(f"<{rank}I", data, pos)
        pos += 4 * rank
        if any(d == 0 or d > _MAX_DIM for d in dims):
            raise WeightFormatError(f"{src}: record {i} has implausible dims {dims}")
        nbytes = 4 * int(np.prod(dims))
        if pos + nbytes > len(data):
            raise TruncatedPayload(f"{src}: record {i} payload cut short "
                                   f"(need {nbytes} bytes, have {len(data) - pos})")
        arr = np.frombuffer(data[pos:pos + nbytes], dtype="<f4").reshape(dims)
        pos += nbytes
        records.append((kind, arr.copy()))
    return records
