"""Regenerate the preprocessing parity fixture.

Builds one deterministic Cornell-layout sample under fixtures/sample/ and
stores the consumer pipeline's composed 224x224x3 tensor for it in
fixtures/expected_tensor.npy. The exporter's test suite re-composes the
same sample with its own preprocessing code and compares against the
stored tensor (tolerance 1e-5 per element).

Requires the `graspdet` package to be installed.

Usage: python3 tools/make_parity_fixture.py
"""

import os
import sys

import cv2
import numpy as np

from graspdet import dataset
from graspdet.preprocess import compose_input

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def build_sample(root: str, sample_id="pcd0100", h=480, w=640) -> None:
    rng = np.random.default_rng(20240824)
    rgb = rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)
    cv2.imwrite(os.path.join(root, f"{sample_id}r.png"),
                cv2.cvtColor(rgb, cv2.COLOR_RGB2BGR),
                [cv2.IMWRITE_PNG_COMPRESSION, 9])

    with open(os.path.join(root, f"{sample_id}cpos.txt"), "w") as f:
        for x, y in [(280, 220), (360, 220), (360, 260), (280, 260)]:
            f.write(f"{x} {y}\n")

    depth = 0.6 + 0.4 * rng.random((h, w))
    # punch a hole region so the fill-with-minimum rule is exercised
    hole = np.zeros((h, w), dtype=bool)
    hole[100:140, 200:260] = True
    with open(os.path.join(root, f"{sample_id}.txt"), "w") as f:
        f.write("FIELDS x y z rgb index\nDATA ascii\n")
        for r in range(h):
            for c in range(w):
                if hole[r, c]:
                    continue
                f.write(f"0 0 {depth[r, c]:.6f} 0 {r * w + c}\n")


def main() -> int:
    sample_dir = os.path.join(FIXTURES, "sample")
    os.makedirs(sample_dir, exist_ok=True)
    build_sample(sample_dir)

    s = dataset.load_sample(sample_dir, "pcd0100")
    inp, _ = compose_input(s)
    np.save(os.path.join(FIXTURES, "expected_tensor.npy"), inp.tensor)
    print(f"fixture written under {os.path.abspath(FIXTURES)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
