"""Benchmark the compiled vs pure-Python quad intersection kernel.

Usage: python3 benchmarks/bench_jaccard.py [n_pairs]
"""

import sys
import time

import numpy as np

from graspdet import _geompure
from graspdet.geometry import GraspRect, rect_to_corners

try:
    from graspdet import _geomfast
except ImportError:
    _geomfast = None


def make_pairs(n, seed=0):
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        corners = []
        for _ in range(2):
            r = GraspRect(rng.uniform(40, 180), rng.uniform(40, 180),
                          rng.uniform(-np.pi, np.pi),
                          rng.uniform(5, 90), rng.uniform(5, 90))
            corners.append(tuple(rect_to_corners(r).corners.ravel()))
        pairs.append(tuple(corners))
    return pairs


def bench(kernel, pairs, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for a, b in pairs:
            acc += kernel.quad_intersection_area(a, b)
        best = min(best, time.perf_counter() - t0)
    return best, acc


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    pairs = make_pairs(n)

    t_pure, acc_pure = bench(_geompure, pairs)
    print(f"pure    {n} pairs: {t_pure:.4f}s "
          f"({n / t_pure:,.0f} pairs/s)")
    if _geomfast is None:
        print("cython  extension not built; skipping")
        return
    t_fast, acc_fast = bench(_geomfast, pairs)
    print(f"cython  {n} pairs: {t_fast:.4f}s "
          f"({n / t_fast:,.0f} pairs/s)")
    print(f"speedup {t_pure / t_fast:.1f}x, "
          f"checksum delta {abs(acc_pure - acc_fast):.3e}")


if __name__ == "__main__":
    main()
