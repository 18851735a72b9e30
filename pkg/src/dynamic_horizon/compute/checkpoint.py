"""Binary parameter checkpoints.

Layout: the 8-byte magic, then per parameter
``u32 name_len | name (utf-8) | u32 rank | u64 dims[rank] | f64 values``,
all little-endian, values row-major.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..constants import CHECKPOINT_MAGIC
from ..exceptions import UsageError
from ..utils.filesystem import ensure_parent
from ..utils.fingerprints import sha256_bytes
from .params import ParameterSet


def encode_checkpoint(params: ParameterSet) -> bytes:
    chunks = [CHECKPOINT_MAGIC]
    for name, value in params.items():
        raw_name = name.encode("utf-8")
        chunks.append(struct.pack("<I", len(raw_name)))
        chunks.append(raw_name)
        chunks.append(struct.pack("<I", value.ndim))
        chunks.append(struct.pack(f"<{value.ndim}Q", *value.shape))
        chunks.append(np.ascontiguousarray(value, dtype="<f8").tobytes())
    return b"".join(chunks)


def decode_checkpoint(data: bytes) -> ParameterSet:
    if not data.startswith(CHECKPOINT_MAGIC):
        raise UsageError("not a checkpoint: bad magic")
    params = ParameterSet()
    offset = len(CHECKPOINT_MAGIC)
    try:
        while offset < len(data):
            (name_len,) = struct.unpack_from("<I", data, offset)
            offset += 4
            name = data[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (rank,) = struct.unpack_from("<I", data, offset)
            offset += 4
            dims = struct.unpack_from(f"<{rank}Q", data, offset)
            offset += 8 * rank
            count = int(np.prod(dims, dtype=np.int64))
            values = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
            offset += 8 * count
            params.add(name, values.reshape(dims).astype(np.float64))
    except (struct.error, ValueError) as exc:
        raise UsageError(f"truncated checkpoint at byte {offset}") from exc
    return params


def save_checkpoint(params: ParameterSet, path: str | Path) -> Path:
    p = Path(path)
    ensure_parent(p)
    p.write_bytes(encode_checkpoint(params))
    return p


def load_checkpoint(path: str | Path) -> ParameterSet:
    return decode_checkpoint(Path(path).read_bytes())


def checkpoint_digest(params: ParameterSet) -> str:
    return sha256_bytes(encode_checkpoint(params))
