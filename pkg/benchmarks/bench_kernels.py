"""Compare the compiled and numpy kernel backends.

Usage: python benchmarks/bench_kernels.py [--modes N] [--times K] [--repeat R]

Prints one line per kernel with the best-of-R wall time of each backend, the
speedup and the largest relative disagreement between the two.
"""
import argparse
import time

import numpy as np

from hyplab import kernels


def best_time(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - start)
    return best, out


def rel_diff(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--modes", type=int, default=100_000)
    ap.add_argument("--times", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--alpha", type=float, default=0.9)
    ap.add_argument("--beta", type=float, default=0.5)
    args = ap.parse_args()

    backends = kernels.available_backends()
    if "cython" not in backends:
        raise SystemExit("compiled backend not built; run: pip install -e . --no-build-isolation")
    mus = np.geomspace(1.0, 1e14, args.modes)
    ts = np.geomspace(10.0, 3162.0, args.times)
    a, b = args.alpha, args.beta
    cases = {
        "eigenvalues": lambda impl: kernels.eigenvalues(mus, a, b, impl=impl),
        "resolvent_norms": lambda impl: kernels.resolvent_norms(1e-3, mus, a, b, impl=impl),
        "semigroup_norms": lambda impl: kernels.semigroup_norms(ts, mus, a, b, "conditioned", impl=impl),
    }
    print(f"modes={args.modes} times={args.times} threads={kernels.threads()} pair=({a}, {b})")
    print(f"{'kernel':<18}{'cython s':>12}{'python s':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, fn in cases.items():
        tc, oc = best_time(lambda: fn("cython"), args.repeat)
        tp, op = best_time(lambda: fn("python"), args.repeat)
        print(f"{name:<18}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{rel_diff(oc, op):>15.2e}")


if __name__ == "__main__":
    main()
