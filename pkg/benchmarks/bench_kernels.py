"""Throughput comparison of the compiled and pure-numpy sampling kernels.

Run:  python benchmarks/bench_kernels.py [--draws N]

Both backends consume the identical RNG stream, so the timed work is the
same; the table reports million coordinate draws per second and the speedup
of the compiled kernels over the fallback.
"""

import argparse
import math
import time

import numpy as np

from certlab import _kernels_py
from certlab.distributions import RngStream

try:
    from certlab import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_fill(backend, name, draws, d=64):
    flat = np.empty(draws, dtype=np.float64)
    grid = np.empty((draws // d, d), dtype=np.float64)
    cases = {
        "gengauss q=1": lambda g: backend.gengauss_fill(g, flat, 1.0, 1.0),
        "gengauss q=2": lambda g: backend.gengauss_fill(g, flat, 2.0, 1.0),
        "gengauss q=4": lambda g: backend.gengauss_fill(g, flat, 4.0, 1.0),
        "uniform-linf": lambda g: backend.uniform_linf_fill(g, flat, 1.0),
        "uniform-l1  ": lambda g: backend.uniform_l1_fill(g, grid, 1.0),
    }
    results = {}
    for label, fn in cases.items():
        gen = RngStream(42, 0).generator()
        results[label] = _time(lambda: fn(gen))
    return results


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--draws", type=int, default=8_000_000,
                        help="coordinate draws per kernel per timing")
    args = parser.parse_args()

    py = bench_fill(_kernels_py, "python", args.draws)
    cy = bench_fill(_kernels, "cython", args.draws) if _kernels is not None else None

    print(f"{args.draws / 1e6:.0f}M coordinate draws per kernel (best of 3)\n")
    header = f"{'kernel':14} {'python (Mdraw/s)':>18}"
    if cy:
        header += f" {'cython (Mdraw/s)':>18} {'speedup':>9}"
    print(header)
    for label in py:
        rate_py = args.draws / py[label] / 1e6
        line = f"{label:14} {rate_py:18.1f}"
        if cy:
            rate_cy = args.draws / cy[label] / 1e6
            line += f" {rate_cy:18.1f} {cy[label] and rate_cy / rate_py:>8.2f}x"
        print(line)
    if cy is None:
        print("\ncompiled backend not built; showing fallback only")


if __name__ == "__main__":
    main()
