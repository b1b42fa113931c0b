"""GFEA writer (byte layout shared with the consumer pipeline).

    magic          4 bytes  "GFEA"
    version        u32      (1)
    name_len       u32      + backbone_name UTF-8 bytes
    dim            u64
    count          u64
    ids            count x (u32 length + UTF-8 bytes)
    data           count * dim float32 little-endian, row-major
"""

from __future__ import annotations

import os
import struct
import tempfile

import numpy as np

MAGIC = b"GFEA"
VERSION = 1


def write_features(path: str, backbone_name: str, dim: int,
                   items: list[tuple[str, np.ndarray]]) -> None:
    """Serialize (id, vector) pairs; the file appears atomically via a
    temp-file rename."""
    name_b = backbone_name.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(os.path.abspath(path)))
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(MAGIC)
            f.write(struct.pack("<I", VERSION))
            f.write(struct.pack("<I", len(name_b)))
            f.write(name_b)
            f.write(struct.pack("<QQ", dim, len(items)))
            for sample_id, _ in items:
                id_b = sample_id.encode("utf-8")
                f.write(struct.pack("<I", len(id_b)))
                f.write(id_b)
            for sample_id, vec in items:
                arr = np.asarray(vec, dtype="<f4").ravel()
                if arr.size != dim:
                    raise ValueError(
                        f"id {sample_id}: dim {arr.size}, expected {dim}")
                f.write(arr.tobytes())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
