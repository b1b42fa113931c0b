import math

import cv2
import numpy as np
import pytest

from graspdet.geometry import GraspRect, rect_to_corners


def write_rect_file(path, rects, extra_lines=None):
    """Write rectangles in Cornell corner format (4 'x y' lines each)."""
    with open(path, "w") as f:
        for r in rects:
            for cx, cy in rect_to_corners(r).corners:
                f.write(f"{cx:.4f} {cy:.4f}\n")
        if extra_lines:
            for ln in extra_lines:
                f.write(ln + "\n")


def write_pointcloud(path, depth, width):
    """Write a dense depth map as a PCD-style ascii file."""
    h, w = depth.shape
    with open(path, "w") as f:
        f.write("# .PCD v.7 - Point Cloud Data file format\n")
        f.write("FIELDS x y z rgb index\n")
        f.write(f"POINTS {h * w}\n")
        f.write("DATA ascii\n")
        for r in range(h):
            for c in range(w):
                idx = r * width + c
                f.write(f"1.0 2.0 {depth[r, c]:.4f} 0 {idx}\n")


def make_cornell_sample(root, sample_id="pcd0100", size=(480, 640),
                        rects=None, with_depth=True, with_neg=False):
    h, w = size
    rng = np.random.default_rng(hash(sample_id) % 2**32)
    rgb = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    cv2.imwrite(str(root / f"{sample_id}r.png"),
                cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR))
    if rects is None:
        rects = [GraspRect(w / 2, h / 2, 0.3, 80, 40),
                 GraspRect(w / 2 + 30, h / 2 - 20, -0.8, 60, 30)]
    write_rect_file(root / f"{sample_id}cpos.txt", rects)
    if with_neg:
        write_rect_file(root / f"{sample_id}cneg.txt",
                        [GraspRect(50, 50, 1.0, 40, 20)])
    if with_depth:
        depth = 0.5 + 0.001 * rng.random((h, w))
        write_pointcloud(root / f"{sample_id}.txt", depth, w)
    return rects


@pytest.fixture
def cornell_root(tmp_path):
    """Tiny synthetic dataset tree in the Cornell layout."""
    for i in range(4):
        make_cornell_sample(tmp_path, f"pcd010{i}")
    return tmp_path


def safe_center_rect(rng=None):
    """A label that survives every default augmentation variant."""
    rng = rng or np.random.default_rng(0)
    return GraspRect(
        x=112 + rng.uniform(-15, 15),
        y=112 + rng.uniform(-15, 15),
        theta=rng.uniform(-math.pi / 2, math.pi / 2),
        w=rng.uniform(10, 40),
        h=rng.uniform(5, 20),
    )
