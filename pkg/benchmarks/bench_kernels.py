"""Compare the numba and numpy kernel backends on realistic workloads.

Run with: python3 benchmarks/bench_kernels.py [sizes...]
"""

import sys
import time

import numpy as np

from mgconsensus import _kernels


def _intervals(rng, n, horizon):
    points = np.sort(rng.uniform(0.0, horizon, 2 * n))
    return points[0::2], points[1::2]


def bench(fn, args, repeat=5):
    fn(*args)  # warm-up (numba compilation)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main(sizes):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'n':>8}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for n in sizes:
        starts, ends = _intervals(rng, n, horizon=10.0 * n)
        trans = np.sort(rng.uniform(0.0, 10.0 * n, n))
        attempts = np.cumsum(rng.uniform(0.01, 0.2, 10 * n))
        healthy = rng.random(10 * n) > 0.3

        cases = {
            "duration_min_slack": (starts, ends, 1.0, 10.0),
            "frequency_min_slack": (trans, 2.0, 5.0),
            "witness_delays": (attempts, healthy),
        }
        for name, args in cases.items():
            t_nb = bench(_kernels.BACKENDS[name]["numba"], args)
            t_np = bench(_kernels.BACKENDS[name]["numpy"], args)
            print(f"{name:<22}{n:>8}{t_nb * 1e3:>10.3f}ms{t_np * 1e3:>10.3f}ms"
                  f"{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main([int(s) for s in sys.argv[1:]] or [100, 1000, 4000])
