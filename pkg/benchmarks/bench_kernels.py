#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from protoneuro._kernels import pure

try:
    from protoneuro._kernels import _native as native
except ImportError:
    native = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(name, make_args, call, repeats):
    args = make_args()
    t_pure = timeit(lambda: call(pure, *args), repeats)
    row = f"{name:<34} pure {t_pure * 1e3:9.2f} ms"
    if native is not None:
        t_native = timeit(lambda: call(native, *args), repeats)
        row += f"   native {t_native * 1e3:9.2f} ms   speedup {t_pure / t_native:6.1f}x"
    print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    if native is None:
        print("compiled kernels not built; timing the fallback only")

    n_sig = 2_000_000
    signal = rng.standard_normal(n_sig).cumsum() * 0.05 + rng.standard_normal(n_sig)
    bench("local_maxima (2e6 samples)",
          lambda: (signal,),
          lambda mod, v: mod.local_maxima(v), args.repeats)

    m = 200_000
    times = np.sort(rng.uniform(0, 1e6, m))
    amps = rng.uniform(0, 1, m)
    bench("prune_min_distance (2e5 peaks)",
          lambda: (times, amps, 12.0),
          lambda mod, t, a, d: mod.prune_min_distance(t, a, d), args.repeats)

    n, steps = 20, 200_000
    drive = rng.uniform(0, 3.0, (n, steps))
    weights = rng.uniform(-1, 1, (n, n)) * 0.002
    v0 = np.full(n, -0.065)
    bench(f"lif_run ({n} neurons x {steps} steps)",
          lambda: (v0, drive, weights),
          lambda mod, v, d, w: mod.lif_run(v, d, w, 0.020, -0.065, -0.050, -0.065,
                                           0.002, 1e-4, 0.005, False),
          args.repeats)

    n, steps = 50, 100_000
    drive_r = rng.uniform(-1, 1, (n, steps))
    weights_r = rng.uniform(-1, 1, (n, n)) / np.sqrt(n)
    bench(f"rate_run ({n} units x {steps} steps)",
          lambda: (np.zeros(n), drive_r, weights_r),
          lambda mod, x, d, w: mod.rate_run(x, d, w, 0.01, 1e-4),
          args.repeats)


if __name__ == "__main__":
    main()
