"""Minimal Cornell-layout reader mirroring the consumer pipeline's
admission rule: a sample needs its RGB image and its positive-rectangle
file; depth comes from the point-cloud text file when present."""

from __future__ import annotations

import math
import os
import re

import cv2
import numpy as np


class DatasetError(Exception):
    pass


def scan_dataset(root: str) -> list[str]:
    try:
        names = os.listdir(root)
    except OSError as e:
        raise DatasetError(f"cannot read dataset root {root}: {e}") from e
    stems = {m.group(1) for n in names
             if (m := re.fullmatch(r"(pcd\d+)r\.png", n))}
    ids = sorted(s for s in stems
                 if os.path.exists(os.path.join(root, s + "cpos.txt")))
    if not ids:
        raise DatasetError(f"no admissible samples under {root}")
    return ids


def load_rgbd(root: str, sample_id: str):
    """Returns (rgb uint8 HxWx3, depth float64 HxW, missing mask)."""
    path = os.path.join(root, sample_id + "r.png")
    bgr = cv2.imread(path, cv2.IMREAD_COLOR)
    if bgr is None:
        raise DatasetError(f"cannot decode image {path}")
    rgb = cv2.cvtColor(bgr, cv2.COLOR_BGR2RGB)
    h, w = rgb.shape[:2]

    depth = np.zeros((h, w), dtype=np.float64)
    missing = np.ones((h, w), dtype=bool)
    pc_path = os.path.join(root, sample_id + ".txt")
    if os.path.exists(pc_path):
        in_data = False
        with open(pc_path) as f:
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
                r, c = divmod(idx, w)
                if 0 <= r < h and 0 <= c < w and math.isfinite(z):
                    depth[r, c] = z
                    missing[r, c] = False
    return rgb, depth, missing
