"""Label-preserving rotation and zoom augmentation in the 224 frame.

Both families act on preprocessed (NetInput, GraspRect) pairs so they
compose in a single coordinate frame. Labels are transformed through the
exact same point map as the image; pairs whose label center leaves the
frame are dropped rather than clipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import cv2
import numpy as np

from .geometry import GraspRect
from .preprocess import FRAME, NetInput

CENTER = FRAME / 2.0  # rotation / zoom anchor (112, 112)

DEFAULT_ROTATIONS = tuple(i * math.pi / 4.0 for i in range(8))
DEFAULT_ZOOMS = (0.5, 0.6, 0.7, 0.8, 0.9, 1.0)

FILL_VALUE = -1.0  # post-normalization black for out-of-frame pixels


@dataclass(frozen=True)
class AugmentSpec:
    rotations: tuple = DEFAULT_ROTATIONS
    zooms: tuple = DEFAULT_ZOOMS

    def __post_init__(self):
        if not self.rotations:
            raise ValueError("rotation list must be non-empty")
        if any(not 0.0 < z <= 1.0 for z in self.zooms):
            raise ValueError(f"zoom ratios must be in (0, 1]: {self.zooms}")


def _in_frame(x: float, y: float) -> bool:
    return 0.0 <= x <= FRAME and 0.0 <= y <= FRAME


def _warp(tensor: np.ndarray, m: np.ndarray) -> np.ndarray:
    return cv2.warpAffine(
        tensor, m, (FRAME, FRAME), flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT,
        borderValue=(FILL_VALUE, FILL_VALUE, FILL_VALUE, FILL_VALUE))


def rotate(inp: NetInput, label: GraspRect,
           angle: float) -> Optional[tuple[NetInput, GraspRect]]:
    """Rotate image and label by `angle` about the frame center.

    Returns None (drop) when the transformed label center leaves the
    frame. Angle 0 is the bit-exact identity.
    """
    if angle == 0.0:
        return inp, label
    c, s = math.cos(angle), math.sin(angle)
    # forward map p' = R (p - center) + center
    m = np.array([[c, -s, CENTER - c * CENTER + s * CENTER],
                  [s, c, CENTER - s * CENTER - c * CENTER]])
    dx, dy = label.x - CENTER, label.y - CENTER
    nx = c * dx - s * dy + CENTER
    ny = s * dx + c * dy + CENTER
    if not _in_frame(nx, ny):
        return None
    new_label = GraspRect(nx, ny, label.theta + angle, label.w, label.h)
    return NetInput(_warp(inp.tensor, m)), new_label


def zoom(inp: NetInput, label: GraspRect,
         factor: float) -> Optional[tuple[NetInput, GraspRect]]:
    """Center-crop to a 224*factor window and scale back to 224.

    Point map: p' = (p - 112*(1 - factor)) / factor. Factor 1 is the
    bit-exact identity.
    """
    if not 0.0 < factor <= 1.0:
        raise ValueError(f"zoom factor must be in (0, 1], got {factor}")
    if factor == 1.0:
        return inp, label
    off = CENTER * (1.0 - factor)
    m = np.array([[1.0 / factor, 0.0, -off / factor],
                  [0.0, 1.0 / factor, -off / factor]])
    nx = (label.x - off) / factor
    ny = (label.y - off) / factor
    if not _in_frame(nx, ny):
        return None
    new_label = GraspRect(nx, ny, label.theta,
                          label.w / factor, label.h / factor)
    return NetInput(_warp(inp.tensor, m)), new_label


@dataclass
class ExpandCounters:
    emitted: int = 0
    dropped: int = 0


def expand(pairs: Iterable[tuple[NetInput, GraspRect]],
           spec: AugmentSpec = AugmentSpec(),
           families: str = "product",
           counters: ExpandCounters | None = None,
           ) -> Iterator[tuple[NetInput, GraspRect]]:
    """Emit every surviving augmented variant of each input pair.

    families="product" composes rotation x zoom (48 variants under the
    defaults); "separate" applies each family on its own (8 + 6, with
    the shared identity emitted once). Output order is deterministic:
    (source index, rotation index, zoom index).
    """
    if families not in ("product", "separate"):
        raise ValueError(f"families must be 'product' or 'separate': {families}")
    if counters is None:
        counters = ExpandCounters()
    for inp, label in pairs:
        if families == "product":
            combos = [(a, z) for a in spec.rotations for z in spec.zooms]
        else:
            combos = [(a, 1.0) for a in spec.rotations]
            combos += [(0.0, z) for z in spec.zooms if z != 1.0]
        for angle, factor in combos:
            pair = rotate(inp, label, angle)
            if pair is not None:
                pair = zoom(pair[0], pair[1], factor)
            if pair is None:
                counters.dropped += 1
                continue
            counters.emitted += 1
            yield pair
