"""Oriented grasp rectangles, corner-form conversion, and the rotated
rectangle success metric (Jaccard overlap + angle condition).

Coordinates are image pixels (x right, y down). Angles are radians
measured from the image x-axis and stored canonically in [-pi/2, pi/2):
a parallel-plate gripper is symmetric under a half turn, so theta and
theta + pi describe the same grasp.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRect, EmptyGroundTruth, NotAParallelogram

if os.environ.get("GRASPDET_PURE_GEOMETRY"):
    from . import _geompure as _kernel
else:
    try:
        from . import _geomfast as _kernel  # type: ignore[no-redef]
    except ImportError:
        from . import _geompure as _kernel  # type: ignore[no-redef]

KERNEL_BACKEND = _kernel.BACKEND

PARALLELOGRAM_TOL = 1.0  # px; slack allowed in c0 + c2 == c1 + c3
MIN_SIDE = 1e-6  # px; below this a quad counts as degenerate


def canonical_angle(theta: float) -> float:
    """Map an angle to the canonical range [-pi/2, pi/2) modulo pi."""
    t = math.fmod(theta + math.pi / 2.0, math.pi)
    if t < 0.0:
        t += math.pi
    return t - math.pi / 2.0


@dataclass(frozen=True)
class GraspRect:
    """5-D grasp: center (x, y), orientation theta, width w along the
    gripper opening direction, height h along the plates."""

    x: float
    y: float
    theta: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"w and h must be positive, got w={self.w} h={self.h}")
        object.__setattr__(self, "theta", canonical_angle(self.theta))


@dataclass(frozen=True)
class CornerRect:
    """Four corners (4x2 array) traversed c0 -> c1 -> c2 -> c3, where
    c0 -> c1 spans the width axis and c1 -> c2 the height axis."""

    corners: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.corners, dtype=np.float64)
        if c.shape != (4, 2):
            raise ValueError(f"corners must be 4x2, got shape {c.shape}")
        object.__setattr__(self, "corners", c)
        gap = np.abs((c[0] + c[2]) - (c[1] + c[3])).max()
        if gap > PARALLELOGRAM_TOL:
            raise NotAParallelogram(f"c0+c2 differs from c1+c3 by {gap:.3g} px")


def rect_to_corners(r: GraspRect) -> CornerRect:
    """Corner form of a grasp rectangle."""
    ux, uy = math.cos(r.theta), math.sin(r.theta)  # width axis
    vx, vy = -uy, ux  # height axis
    hw, hh = 0.5 * r.w, 0.5 * r.h
    return CornerRect(np.array([
        [r.x - hw * ux - hh * vx, r.y - hw * uy - hh * vy],
        [r.x + hw * ux - hh * vx, r.y + hw * uy - hh * vy],
        [r.x + hw * ux + hh * vx, r.y + hw * uy + hh * vy],
        [r.x - hw * ux + hh * vx, r.y - hw * uy + hh * vy],
    ]))


def corners_to_rect(c: CornerRect) -> GraspRect:
    """Fit a GraspRect to a corner quad.

    Center is the corner mean; theta comes from the c0 -> c1 edge; w and
    h are the two edge lengths. Inverse of rect_to_corners up to cyclic
    corner order and the mod-pi angle canonicalization.
    """
    pts = c.corners
    cx, cy = pts.mean(axis=0)
    d01 = pts[1] - pts[0]
    d12 = pts[2] - pts[1]
    w = float(np.hypot(*d01))
    h = float(np.hypot(*d12))
    if w < MIN_SIDE or h < MIN_SIDE:
        raise DegenerateRect(f"side lengths w={w:.3g} h={h:.3g}")
    theta = math.atan2(d01[1], d01[0])
    return GraspRect(float(cx), float(cy), theta, w, h)


def rect_area(r: GraspRect) -> float:
    return r.w * r.h


def _flat_corners(r: GraspRect) -> tuple:
    return tuple(rect_to_corners(r).corners.ravel())


def jaccard(a: GraspRect, b: GraspRect) -> float:
    """Intersection area over union area of two grasp rectangles.

    Exact polygon clipping, not rasterization. The two operands are
    ordered by a deterministic key before clipping so J(a, b) == J(b, a)
    bit for bit.
    """
    fa, fb = _flat_corners(a), _flat_corners(b)
    if fb < fa:
        fa, fb = fb, fa
    inter = _kernel.quad_intersection_area(fa, fb)
    union = rect_area(a) + rect_area(b) - inter
    if union <= 0.0:
        return 0.0
    j = inter / union
    return min(max(j, 0.0), 1.0)


def angle_diff(a: GraspRect, b: GraspRect) -> float:
    """Minimal absolute orientation difference modulo pi, in [0, pi/2]."""
    d = abs(math.fmod(a.theta - b.theta, math.pi))
    return min(d, math.pi - d)


def is_success(pred: GraspRect, truths: list[GraspRect],
               angle_tol: float = math.pi / 6,
               jaccard_min: float = 0.25) -> tuple[bool, int]:
    """Rectangle-metric success check against any ground-truth label.

    Success needs some truth with angle difference strictly below
    angle_tol and Jaccard strictly above jaccard_min. Returns (verdict,
    index of the best-Jaccard qualifying truth), index -1 on failure.
    """
    if not truths:
        raise EmptyGroundTruth("no ground-truth rectangles")
    best_idx = -1
    best_j = -1.0
    for i, t in enumerate(truths):
        if angle_diff(pred, t) >= angle_tol:
            continue
        j = jaccard(pred, t)
        if j > jaccard_min and j > best_j:
            best_j = j
            best_idx = i
    return best_idx >= 0, best_idx
