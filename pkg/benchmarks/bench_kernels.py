#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-numpy fallback.

Times the dense coordinate-descent updates and the masked updates on a few
problem sizes and prints a table with the speedup.  Run from the repository
root after an editable install:

    python3 benchmarks/bench_kernels.py
"""

import argparse
import time

import numpy as np

from nmfrank._backend import _py_kernels as py

try:
    from nmfrank._backend import _cy_kernels as cy
except ImportError:
    cy = None

EPS = 1e-16


def time_call(func, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        func()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_dense(kernels, A, W, H, repeats):
    G, B = W.T @ W, A.T @ W
    Gw, Bw = H @ H.T, A @ H.T

    def run():
        kernels.scd_update_h(H.copy(), G, B, EPS)
        kernels.scd_update_w(W.copy(), Gw, Bw, EPS)

    return time_call(run, repeats)


def bench_masked(kernels, A, obs, W, H, repeats):
    if kernels is cy:
        obs = np.ascontiguousarray(obs).view(np.uint8)

    def run():
        kernels.masked_update_h(A, obs, W, H.copy(), EPS)
        kernels.masked_update_w(A, obs, W.copy(), H, EPS)

    return time_call(run, repeats)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per case (best is kept)")
    args = parser.parse_args()

    if cy is None:
        print("compiled kernels unavailable; nothing to compare")
        return

    rng = np.random.default_rng(0)
    cases = [(128, 128, 8), (256, 512, 16), (512, 1024, 32)]
    print(f"{'case':<22} {'kind':<7} {'python':>10} {'cython':>10} {'speedup':>8}")
    for m, n, k in cases:
        A = rng.random((m, n))
        W, H = rng.random((m, k)), rng.random((k, n))
        obs = rng.random((m, n)) > 0.1

        t_py = bench_dense(py, A, W, H, args.repeats)
        t_cy = bench_dense(cy, A, W, H, args.repeats)
        print(f"{f'{m}x{n} k={k}':<22} {'dense':<7} {t_py:>9.4f}s {t_cy:>9.4f}s "
              f"{t_py / t_cy:>7.1f}x")

        t_py = bench_masked(py, A, obs, W, H, args.repeats)
        t_cy = bench_masked(cy, A, obs, W, H, args.repeats)
        print(f"{'':<22} {'masked':<7} {t_py:>9.4f}s {t_cy:>9.4f}s "
              f"{t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
