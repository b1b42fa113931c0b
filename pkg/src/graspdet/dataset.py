"""Cornell grasp dataset ingestion.

Expected layout under a root directory:

    pcdNNNNr.png      RGB image
    pcdNNNN.txt       point cloud (PCD-style ascii, last column is the
                      pixel index row*width + col)
    pcdNNNNcpos.txt   graspable rectangle labels, 4 "x y" lines each
    pcdNNNNcneg.txt   non-graspable labels (parsed, unused by training)

A sample is admitted when the RGB image and the cpos file both exist.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field

import cv2
import numpy as np

from .errors import (
    DegenerateRect,
    EmptyDataset,
    EmptyGroundTruth,
    IoError,
    MalformedLabelFile,
    NotAParallelogram,
)
from .geometry import CornerRect, GraspRect, corners_to_rect


@dataclass
class Sample:
    """One dataset record."""

    id: str
    rgb: np.ndarray              # H x W x 3 uint8
    depth: np.ndarray            # H x W float64
    pos_rects: list[GraspRect]
    neg_rects: list[GraspRect] = field(default_factory=list)
    depth_missing: np.ndarray | None = None  # H x W bool, True where no point
    depth_warning: bool = False              # True when depth file was absent
    skipped_labels: int = 0                  # NaN / degenerate quads dropped


@dataclass
class DatasetSplit:
    train_ids: list[str]
    val_ids: list[str]
    seed: int


def scan_dataset(root: str) -> list[str]:
    """Ids admitted under root, in lexicographic order."""
    try:
        names = os.listdir(root)
    except OSError as e:
        raise IoError(f"cannot read dataset root {root}: {e}") from e
    stems = set()
    for n in names:
        m = re.fullmatch(r"(pcd\d+)r\.png", n)
        if m:
            stems.add(m.group(1))
    ids = sorted(s for s in stems
                 if os.path.exists(os.path.join(root, s + "cpos.txt")))
    if not ids:
        raise EmptyDataset(f"no admissible samples under {root}")
    return ids


def _parse_rect_file(path: str) -> tuple[list[GraspRect], int]:
    """Parse a cpos/cneg file into rectangles.

    Returns (rects, skipped) where skipped counts quads dropped for
    non-finite corners or degenerate/non-parallelogram geometry (the real
    dataset contains NaN rows).
    """
    with open(path) as f:
        lines = [ln for ln in (l.strip() for l in f) if ln]
    if len(lines) % 4 != 0:
        raise MalformedLabelFile(
            f"{path}: {len(lines)} non-empty lines, not a multiple of 4")
    rects = []
    skipped = 0
    for q in range(0, len(lines), 4):
        corners = np.empty((4, 2))
        for i in range(4):
            parts = lines[q + i].split()
            if len(parts) != 2:
                raise MalformedLabelFile(
                    f"{path}: line {q + i + 1}: expected 'x y', got {lines[q + i]!r}")
            try:
                corners[i] = [float(parts[0]), float(parts[1])]
            except ValueError as e:
                raise MalformedLabelFile(
                    f"{path}: line {q + i + 1}: {e}") from e
        if not np.isfinite(corners).all():
            skipped += 1
            continue
        try:
            rects.append(corners_to_rect(CornerRect(corners)))
        except (DegenerateRect, NotAParallelogram):
            skipped += 1
    return rects, skipped


def _load_depth(path: str, height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Decode a Cornell point-cloud file into a dense depth map.

    Data rows are "x y z rgb index"; index maps to pixel (index // width,
    index % width) and z is taken as the depth value. Pixels without a
    point stay 0 and are flagged in the missing mask.
    """
    depth = np.zeros((height, width), dtype=np.float64)
    missing = np.ones((height, width), dtype=bool)
    in_data = False
    with open(path) as f:
        for ln in f:
            ln = ln.strip()
            if not in_data:
                if ln.upper().startswith("DATA"):
                    in_data = True
                continue
            parts = ln.split()
            if len(parts) < 5:
                continue
            try:
                z = float(parts[2])
                idx = int(float(parts[4]))
            except ValueError:
                continue
            r, c = divmod(idx, width)
            if 0 <= r < height and 0 <= c < width and math.isfinite(z):
                depth[r, c] = z
                missing[r, c] = False
    return depth, missing


def load_sample(root: str, sample_id: str) -> Sample:
    rgb_path = os.path.join(root, sample_id + "r.png")
    bgr = cv2.imread(rgb_path, cv2.IMREAD_COLOR)
    if bgr is None:
        raise IoError(f"cannot decode image {rgb_path}")
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    h, w = rgb.shape[:2]

    pos, skipped = _parse_rect_file(os.path.join(root, sample_id + "cpos.txt"))
    neg_path = os.path.join(root, sample_id + "cneg.txt")
    neg: list[GraspRect] = []
    if os.path.exists(neg_path):
        neg, neg_skipped = _parse_rect_file(neg_path)
        skipped += neg_skipped

    depth_path = os.path.join(root, sample_id + ".txt")
    if os.path.exists(depth_path):
        depth, missing = _load_depth(depth_path, h, w)
        warning = False
    else:
        depth = np.zeros((h, w), dtype=np.float64)
        missing = np.ones((h, w), dtype=bool)
        warning = True

    return Sample(id=sample_id, rgb=rgb, depth=depth, pos_rects=pos,
                  neg_rects=neg, depth_missing=missing,
                  depth_warning=warning, skipped_labels=skipped)


def split(ids: list[str], ratio: float = 0.9, seed: int = 0) -> DatasetSplit:
    """Seeded shuffle; first ceil(ratio * n) ids go to train."""
    if not ids:
        raise EmptyDataset("cannot split an empty id list")
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(ids))
    n_train = math.ceil(ratio * len(ids))
    shuffled = [ids[i] for i in order]
    return DatasetSplit(train_ids=shuffled[:n_train],
                        val_ids=shuffled[n_train:], seed=seed)


def pick_label(s: Sample, rng: np.random.Generator) -> GraspRect:
    """Uniform random choice among the sample's positive labels."""
    if not s.pos_rects:
        raise EmptyGroundTruth(f"sample {s.id} has no positive rectangles")
    return s.pos_rects[int(rng.integers(len(s.pos_rects)))]


def save_split(sp: DatasetSplit, path: str) -> None:
    with open(path, "w") as f:
        f.write(f"seed={sp.seed}\n")
        f.write("[train]\n")
        for i in sp.train_ids:
            f.write(i + "\n")
        f.write("[val]\n")
        for i in sp.val_ids:
            f.write(i + "\n")


def load_split(path: str) -> DatasetSplit:
    seed = 0
    section = None
    train: list[str] = []
    val: list[str] = []
    with open(path) as f:
        for ln in (l.strip() for l in f):
            if not ln:
                continue
            if ln.startswith("seed="):
                seed = int(ln[5:])
            elif ln == "[train]":
                section = train
            elif ln == "[val]":
                section = val
            elif section is not None:
                section.append(ln)
    return DatasetSplit(train_ids=train, val_ids=val, seed=seed)
