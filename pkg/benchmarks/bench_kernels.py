#!/usr/bin/env python3
"""Benchmark the compiled bootstrap kernel against the numpy fallback.

Times the hot path (resample -> re-partition -> two side fits -> Wald
point, per replicate) on a synthetic window of varying size, checks both
backends agree, and prints a comparison table.

Usage:
    python3 benchmarks/bench_kernels.py [--window-sizes 250,1000,4000]
                                        [--replications 2000] [--repeats 3]
"""

import argparse
import time

import numpy as np

from rdd_kit import _kernels_py

try:
    from rdd_kit import _kernels_c
except ImportError:
    _kernels_c = None


def make_workload(m, replications, seed=0):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(-0.1, 0.1, m))
    above = (x >= 0).astype(np.uint8)
    t = np.where(above == 1, rng.random(m) < 0.85, rng.random(m) < 0.15)
    t = t.astype(np.float64)
    y = 2.0 + 0.5 * x - 0.9 * t + rng.normal(0, 0.4, m)
    idx = rng.integers(0, m, size=(replications, m), dtype=np.int64)
    return x, y, t, above, idx


def run_once(kernels, workload):
    x, y, t, above, idx = workload
    points = np.empty(idx.shape[0])
    flags = np.empty(idx.shape[0], dtype=np.int32)
    start = time.perf_counter()
    kernels.bootstrap_batch(x, y, t, above, idx, True, 0.05, points, flags)
    return time.perf_counter() - start, points, flags


def best_of(kernels, workload, repeats):
    run_once(kernels, workload)  # warmup
    times, points, flags = [], None, None
    for _ in range(repeats):
        elapsed, points, flags = run_once(kernels, workload)
        times.append(elapsed)
    return min(times), points, flags


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--window-sizes", default="250,1000,4000")
    parser.add_argument("--replications", type=int, default=2000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.window_sizes.split(",")]

    print(f"replications per batch: {args.replications}")
    header = f"{'window':>8s} {'python (s)':>12s} {'c (s)':>12s} {'speedup':>9s} {'max |diff|':>11s}"
    print(header)
    print("-" * len(header))
    for m in sizes:
        workload = make_workload(m, args.replications)
        t_py, p_py, f_py = best_of(_kernels_py, workload, args.repeats)
        if _kernels_c is None:
            print(f"{m:>8d} {t_py:>12.4f} {'n/a':>12s} {'n/a':>9s} {'n/a':>11s}")
            continue
        t_c, p_c, f_c = best_of(_kernels_c, workload, args.repeats)
        if not np.array_equal(f_py, f_c):
            raise SystemExit("backends disagree on failure flags")
        ok = f_py == _kernels_py.FLAG_OK
        diff = float(np.max(np.abs(p_py[ok] - p_c[ok]))) if ok.any() else 0.0
        if diff > 1e-9:
            raise SystemExit(f"backends disagree: max |diff| = {diff:g}")
        print(f"{m:>8d} {t_py:>12.4f} {t_c:>12.4f} {t_py / t_c:>8.1f}x {diff:>11.2e}")
    if _kernels_c is None:
        print("compiled kernel not built; install with Cython + a C compiler")


if __name__ == "__main__":
    main()
