"""Compare the numba kernels against the pure-numpy fallbacks.

Runs each hot kernel on both backends at a few month-of-use sizes and
prints wall times plus the speedup. Numba compilation is excluded by a
warm-up call. Invoke as:

    python benchmarks/bench_backends.py [--repeat 5]
"""

import argparse
import time

import numpy as np

from tdoakit import kernels
from tdoakit.geometry import anchor_distances, pair_indices


def timed(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = kernels.backends()
    if "numba" not in backends:
        print("numba backend unavailable (TDOAKIT_DISABLE_NUMBA set or import failed);")
        print("nothing to compare.")
        return

    rng = np.random.default_rng(0)
    anchors5 = np.array([[0, 0], [2, 0.2], [0.1, 2], [-2, 0.3], [-0.2, -2]], float)
    anchors8 = rng.uniform(-3, 3, (8, 2))
    txy = anchors5[1:] - anchors5[0]

    target = np.array([0.4, -0.3])
    d = anchor_distances(target, anchors5)
    pairs = pair_indices(5)
    n_samples = 20_000
    noise = rng.standard_normal((n_samples, 5)) * 0.3
    pseudo = d[None, :] + noise
    dhat = pseudo[:, pairs[:, 0]] - pseudo[:, pairs[:, 1]]
    init = np.array([0.1, 0.1])

    grid = np.linspace(-2.0, 2.0, 200)

    cases = [
        ("kappa_grid 200x200 n=5", "kappa_grid", (grid, grid, anchors5)),
        ("kappa_grid 200x200 n=8", "kappa_grid", (grid, grid, anchors8)),
        ("central_cond_grid 200x200", "central_cond_grid", (grid, grid, txy)),
        ("symmetric_cond_grid 200x200", "symmetric_cond_grid", (grid, grid, anchors5)),
        ("locate_central_batch 20k", "locate_central_batch", (anchors5, 0, dhat)),
        ("locate_symmetric_batch 20k", "locate_symmetric_batch", (anchors5, dhat)),
        ("locate_gn_batch 20k", "locate_gn_batch", (anchors5, dhat, init, 1e-9, 100, 1e-9)),
    ]

    print(f"{'case':34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for label, name, call_args in cases:
        # warm-up compiles the numba kernel and touches the numpy path once
        for impl in backends.values():
            impl[name](*call_args)
        times = {
            bname: timed(lambda impl=impl: impl[name](*call_args), args.repeat)
            for bname, impl in backends.items()
        }
        print(
            f"{label:34} {times['numpy'] * 1e3:9.1f}ms {times['numba'] * 1e3:9.1f}ms "
            f"{times['numpy'] / times['numba']:7.1f}x"
        )


if __name__ == "__main__":
    main()
