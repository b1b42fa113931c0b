"""Input and output normalization.

Network inputs are 224x224x3 tensors with channels {R, G, depth}, each
channel min-max scaled to [-1, 1] after the spatial resize. Regression
targets are the 6-vector (x, y, sin, cos, w, h) rescaled to [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from .dataset import Sample
from .errors import OutOfFrame
from .geometry import CornerRect, GraspRect, canonical_angle, corners_to_rect, rect_to_corners

FRAME = 224


@dataclass(frozen=True)
class NetInput:
    """224x224x3 float tensor in [-1, 1], channels {R, G, depth}."""

    tensor: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.tensor, dtype=np.float64)
        if t.shape != (FRAME, FRAME, 3):
            raise ValueError(f"expected {FRAME}x{FRAME}x3, got {t.shape}")
        object.__setattr__(self, "tensor", t)


@dataclass(frozen=True)
class ResizeTransform:
    """Affine pixel map from the source frame into the 224 frame."""

    sx: float
    sy: float

    def map_rect(self, r: GraspRect) -> GraspRect:
        """Map a rectangle by scaling its corners and re-fitting.

        Anisotropic scaling does not commute with rotation, so the angle
        must come from transformed corners, not from scaling theta.
        """
        c = rect_to_corners(r).corners * np.array([self.sx, self.sy])
        return corners_to_rect(CornerRect(c))


@dataclass(frozen=True)
class NormTargetVec:
    """Normalized 6-D regression target, each component in [0, 1] when
    produced from a valid in-frame rectangle."""

    x_n: float
    y_n: float
    s_n: float
    c_n: float
    w_n: float
    h_n: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x_n, self.y_n, self.s_n, self.c_n,
                         self.w_n, self.h_n])

    @classmethod
    def from_array(cls, a) -> "NormTargetVec":
        x, y, s, c, w, h = (float(v) for v in a)
        return cls(x, y, s, c, w, h)


def normalize_channel(chan: np.ndarray) -> np.ndarray:
    """Min-max scale one channel to [-1, 1]; constant channels map to 0."""
    chan = np.asarray(chan, dtype=np.float64)
    lo, hi = chan.min(), chan.max()
    if hi == lo:
        return np.zeros_like(chan)
    return (chan - lo) / (hi - lo) * 2.0 - 1.0


def compose_input(s: Sample) -> tuple[NetInput, ResizeTransform]:
    """Build the network input for a sample.

    Depth replaces the blue channel. Resize happens first (bilinear),
    then each channel is min-max normalized, so the [-1, 1] bound holds
    exactly on the tensor the network sees. Depth holes are filled with
    the minimum observed depth so they land on -1 after normalization.
    """
    h, w = s.rgb.shape[:2]
    depth = s.depth
    if s.depth_missing is not None and s.depth_missing.any():
        valid = ~s.depth_missing
        fill = depth[valid].min() if valid.any() else 0.0
        depth = np.where(s.depth_missing, fill, depth)

    r = cv2.resize(s.rgb[:, :, 0].astype(np.float64), (FRAME, FRAME),
                   interpolation=cv2.INTER_LINEAR)
    g = cv2.resize(s.rgb[:, :, 1].astype(np.float64), (FRAME, FRAME),
                   interpolation=cv2.INTER_LINEAR)
    d = cv2.resize(depth, (FRAME, FRAME), interpolation=cv2.INTER_LINEAR)

    tensor = np.stack(
        [normalize_channel(r), normalize_channel(g), normalize_channel(d)],
        axis=-1)
    return NetInput(tensor), ResizeTransform(sx=FRAME / w, sy=FRAME / h)


def normalize_target(r: GraspRect) -> NormTargetVec:
    """Rescale a 224-frame rectangle into the [0, 1] target space."""
    for name, v in (("x", r.x), ("y", r.y), ("w", r.w), ("h", r.h)):
        if not 0.0 <= v <= FRAME:
            raise OutOfFrame(f"{name}={v} outside [0, {FRAME}]")
    return NormTargetVec(
        x_n=r.x / FRAME,
        y_n=r.y / FRAME,
        s_n=(math.sin(r.theta) + 1.0) / 2.0,
        c_n=(math.cos(r.theta) + 1.0) / 2.0,
        w_n=r.w / FRAME,
        h_n=r.h / FRAME,
    )


def denormalize_target(t: NormTargetVec) -> GraspRect:
    """Invert normalize_target, totally: network output may leave [0, 1],
    so position/size components are clamped, sizes floored at 1 px, and
    the angle recovered by atan2 of the (possibly off-circle) sin/cos
    pair. A zero-length sin/cos vector maps to theta = 0."""
    clamp = lambda v: min(max(v, 0.0), 1.0)
    sin_t = 2.0 * t.s_n - 1.0
    cos_t = 2.0 * t.c_n - 1.0
    theta = 0.0 if sin_t == 0.0 and cos_t == 0.0 else math.atan2(sin_t, cos_t)
    return GraspRect(
        x=clamp(t.x_n) * FRAME,
        y=clamp(t.y_n) * FRAME,
        theta=canonical_angle(theta),
        w=max(clamp(t.w_n) * FRAME, 1.0),
        h=max(clamp(t.h_n) * FRAME, 1.0),
    )
