"""Input composition for the backbone: 224x224, channels {R, G, depth},
each channel min-max scaled to [-1, 1] after the resize.

This intentionally duplicates the consumer pipeline's preprocessing math
instead of importing it; the parity fixture test keeps the two
implementations in agreement across the package boundary.
"""

from __future__ import annotations

import numpy as np
import cv2

FRAME = 224


def normalize_channel(chan: np.ndarray) -> np.ndarray:
    chan = np.asarray(chan, dtype=np.float64)
    lo, hi = chan.min(), chan.max()
    if hi == lo:
        return np.zeros_like(chan)
    return (chan - lo) / (hi - lo) * 2.0 - 1.0


def compose_input(rgb: np.ndarray, depth: np.ndarray,
                  depth_missing: np.ndarray | None = None) -> np.ndarray:
    """224x224x3 float64 tensor in [-1, 1] with depth in the blue slot.

    Depth holes are filled with the minimum observed depth before the
    resize so they land on -1 after normalization.
    """
    if depth_missing is not None and depth_missing.any():
        valid = ~depth_missing
        fill = depth[valid].min() if valid.any() else 0.0
        depth = np.where(depth_missing, fill, depth)

    r = cv2.resize(rgb[:, :, 0].astype(np.float64), (FRAME, FRAME),
                   interpolation=cv2.INTER_LINEAR)
    g = cv2.resize(rgb[:, :, 1].astype(np.float64), (FRAME, FRAME),
                   interpolation=cv2.INTER_LINEAR)
    d = cv2.resize(depth.astype(np.float64), (FRAME, FRAME),
                   interpolation=cv2.INTER_LINEAR)
    return np.stack(
        [normalize_channel(r), normalize_channel(g), normalize_channel(d)],
        axis=-1)
