"""Feature-vector contract between images and the regressor.

Two feature sources exist: a deterministic seeded toy extractor (stands
in for a frozen pretrained backbone in self-contained runs) and a loader
for the GFEA binary interchange file produced by an external backbone
exporter.

GFEA layout (all integers little-endian):

    magic          4 bytes  "GFEA"
    version        u32      (currently 1)
    name_len       u32      followed by backbone_name UTF-8 bytes
    dim            u64
    count          u64
    ids            count x (u32 length + UTF-8 bytes)
    data           count * dim float32, row-major
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BadMagic,
    DuplicateId,
    IoError,
    TruncatedPayload,
    VersionUnsupported,
)
from .preprocess import NetInput

MAGIC = b"GFEA"
VERSION = 1

TOY_POOL = 8  # toy extractor pools the input to TOY_POOL x TOY_POOL x 3


@dataclass(frozen=True)
class FeatureVec:
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64).ravel()
        if not np.isfinite(v).all():
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "values", v)

    @property
    def dim(self) -> int:
        return self.values.size


@lru_cache(maxsize=8)
def _toy_projection(seed: int, dim: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    in_dim = TOY_POOL * TOY_POOL * 3
    return rng.standard_normal((dim, in_dim)) / np.sqrt(in_dim)


def toy_extract(inp: NetInput, seed: int = 0, dim: int = 1024) -> FeatureVec:
    """Deterministic frozen features: average-pool the input to 8x8x3,
    apply a fixed seeded random projection, then tanh."""
    if dim <= 0:
        raise ValueError(f"dim must be positive, got {dim}")
    t = inp.tensor
    block = t.shape[0] // TOY_POOL
    pooled = t.reshape(TOY_POOL, block, TOY_POOL, block, 3).mean(axis=(1, 3))
    proj = _toy_projection(seed, dim)
    return FeatureVec(np.tanh(proj @ pooled.ravel()))


@dataclass
class FeatureFile:
    backbone_name: str
    dim: int
    features: dict[str, FeatureVec]

    @property
    def count(self) -> int:
        return len(self.features)


def write_features(path: str, backbone_name: str, dim: int,
                   items: list[tuple[str, np.ndarray]]) -> None:
    """Serialize (id, vector) pairs into a GFEA file."""
    name_b = backbone_name.encode("utf-8")
    with open(path, "wb") as f:
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
                    f"id {sample_id}: vector has dim {arr.size}, expected {dim}")
            f.write(arr.tobytes())


class _Reader:
    def __init__(self, path: str):
        try:
            with open(path, "rb") as f:
                self.buf = f.read()
        except OSError as e:
            raise IoError(f"cannot read {path}: {e}") from e
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.buf):
            raise TruncatedPayload(self.off + n, len(self.buf))
        out = self.buf[self.off:self.off + n]
        self.off += n
        return out


def load_features(path: str) -> FeatureFile:
    """Parse and validate a GFEA file."""
    r = _Reader(path)
    if r.take(4) != MAGIC:
        raise BadMagic(f"{path} is not a GFEA file")
    (version,) = struct.unpack("<I", r.take(4))
    if version != VERSION:
        raise VersionUnsupported(f"version {version}, reader supports {VERSION}")
    (name_len,) = struct.unpack("<I", r.take(4))
    backbone_name = r.take(name_len).decode("utf-8")
    dim, count = struct.unpack("<QQ", r.take(16))
    ids = []
    for _ in range(count):
        (id_len,) = struct.unpack("<I", r.take(4))
        ids.append(r.take(id_len).decode("utf-8"))
    data = np.frombuffer(r.take(count * dim * 4), dtype="<f4")
    if r.off != len(r.buf):
        raise TruncatedPayload(r.off, len(r.buf))
    features: dict[str, FeatureVec] = {}
    for i, sample_id in enumerate(ids):
        if sample_id in features:
            raise DuplicateId(f"id {sample_id!r} appears twice in {path}")
        features[sample_id] = FeatureVec(
            data[i * dim:(i + 1) * dim].astype(np.float64))
    return FeatureFile(backbone_name=backbone_name, dim=int(dim),
                       features=features)


def checksum(path: str) -> str:
    """CRC32 of the whole file, for the validate CLI."""
    with open(path, "rb") as f:
        return f"{zlib.crc32(f.read()):08x}"
