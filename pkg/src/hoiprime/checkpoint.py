"""Binary checkpoint files.

Layout: magic ``HOIP``, u32 format version, 32-byte config hash, u32
record count, then per record a u16 name length, the UTF-8 name, u8
ndim, u32 dims, and the values as little-endian float32. Records keep
their insertion order so a save is byte-deterministic, and because all
model state lives in float32 a save/load round trip is bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .tensor import Tensor

MAGIC = b"HOIP"
VERSION = 1


def save_checkpoint(path, state: dict[str, Tensor], config_hash: str) -> None:
    digest = bytes.fromhex(config_hash)
    if len(digest) != 32:
        raise CheckpointError("config hash must be a 64-char hex digest")
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", VERSION)
    blob += digest
    blob += struct.pack("<I", len(state))
    for name, tensor in state.items():
        arr = np.ascontiguousarray(tensor.data, dtype="<f4")
        encoded = name.encode("utf-8")
        blob += struct.pack("<H", len(encoded))
        blob += encoded
        blob += struct.pack("<B", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
        blob += arr.tobytes()
    Path(path).write_bytes(bytes(blob))


def load_checkpoint(path) -> tuple[dict[str, np.ndarray], str]:
    """Read a checkpoint; returns (name -> float32 array, config hash hex)."""
    raw = Path(path).read_bytes()
    off = 0

    def take(n: int) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise CheckpointError("truncated checkpoint file")
        piece = raw[off:off + n]
        off += n
        return piece

    if take(4) != MAGIC:
        raise CheckpointError("bad magic, not a checkpoint file")
    (version,) = struct.unpack("<I", take(4))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    digest = take(32).hex()
    (count,) = struct.unpack("<I", take(4))
    state: dict[str, np.ndarray] = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        shape = struct.unpack(f"<{ndim}I", take(4 * ndim)) if ndim else ()
        n_vals = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(take(4 * n_vals), dtype="<f4").reshape(shape)
        state[name] = arr.copy()
    if off != len(raw):
        raise CheckpointError("trailing bytes after final record")
    return state, digest
