"""Named-tensor checkpoint blobs.

Layout (little-endian): magic ``IPPDCKP1`` | u32 version | u32 tensor
count | per tensor: u16 name length, UTF-8 name, u8 rank, rank x u32
dims, float32 data. Hyperparameters ride along as scalar tensors under
``config/`` names, so a file is self-describing.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DataError

CKPT_MAGIC = b"IPPDCKP1"
CKPT_VERSION = 1


def save_checkpoint(path, tensors):
    """Write a dict of name -> array-like (float32 on disk)."""
    parts = [CKPT_MAGIC, struct.pack("<II", CKPT_VERSION, len(tensors))]
    for name in sorted(tensors):
        arr = np.ascontiguousarray(np.asarray(tensors[name]), dtype="<f4")
        enc = name.encode("utf-8")
        parts.append(struct.pack("<H", len(enc)))
        parts.append(enc)
        parts.append(struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b"")
        parts.append(arr.tobytes())
    with open(path, "wb") as f:
        f.write(b"".join(parts))


def load_checkpoint(path):
    """Read a checkpoint back into a dict of name -> float32 ndarray."""
    with open(path, "rb") as f:
        blob = f.read()
    if blob[:8] != CKPT_MAGIC:
        raise DataError(f"{path}: not a checkpoint file")
    version, count = struct.unpack_from("<II", blob, 8)
    if version != CKPT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {version}")
    off = 16
    tensors = {}
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", blob, off)
            off += 2
            name = blob[off:off + name_len].decode("utf-8")
            off += name_len
            (rank,) = struct.unpack_from("<B", blob, off)
            off += 1
            shape = struct.unpack_from(f"<{rank}I", blob, off)
            off += 4 * rank
            n = int(np.prod(shape, dtype=np.int64)) if rank else 1
            arr = np.frombuffer(blob, dtype="<f4", count=n, offset=off)
            off += 4 * n
            tensors[name] = arr.reshape(shape).copy()
    except (struct.error, ValueError) as e:
        raise DataError(f"{path}: truncated or corrupt checkpoint ({e})") from None
    if off != len(blob):
        raise DataError(f"{path}: trailing bytes after {count} tensors")
    return tensors
