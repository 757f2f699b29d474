"""Compare the compiled feature kernel against the NumPy fallback.

The contribution-feature construction (per-sample Z_i^T Z_i products) is
the hot loop of Gram computation; this script times it for both backends
over a size grid and reports the end-to-end Gram time as well.

Usage: python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from depcon import backend
from depcon.kernel import distance_moments


def time_features(impl, values, repeats):
    row_mean, grand_mean = distance_moments(values)
    n, m = values.shape
    out = np.empty((n, m, m))
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        impl.phi_feature_block(values, row_mean, grand_mean, 0, n, True, out)
        timings.append(time.perf_counter() - started)
    return min(timings), out


def time_gram(name, values, repeats):
    from depcon.kernel import gram_matrix

    _, impl = backend.get_backend(name)
    original = backend._impl
    backend._impl = impl
    try:
        timings = []
        for _ in range(repeats):
            started = time.perf_counter()
            gram_matrix(values)
            timings.append(time.perf_counter() - started)
    finally:
        backend._impl = original
    return min(timings)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="small grid, one repeat")
    args = parser.parse_args()

    if "compiled" not in backend.available_backends():
        print("compiled backend not built; nothing to compare")
        return

    grid = [(200, 5), (500, 10), (1000, 10)] if args.quick else [
        (200, 5),
        (500, 10),
        (1000, 10),
        (2000, 10),
        (2000, 20),
        (4000, 10),
    ]
    repeats = 1 if args.quick else 3
    rng = np.random.default_rng(0)

    print(f"{'n':>6} {'m':>4} {'numpy (s)':>12} {'compiled (s)':>13} {'speedup':>8}  max|diff|")
    _, compiled = backend.get_backend("compiled")
    _, fallback = backend.get_backend("numpy")
    for n, m in grid:
        values = np.ascontiguousarray(rng.standard_normal((n, m)))
        numpy_time, numpy_out = time_features(fallback, values, repeats)
        compiled_time, compiled_out = time_features(compiled, values, repeats)
        diff = float(np.abs(numpy_out - compiled_out).max())
        print(
            f"{n:>6} {m:>4} {numpy_time:>12.4f} {compiled_time:>13.4f} "
            f"{numpy_time / compiled_time:>7.2f}x  {diff:.2e}"
        )

    print("\nend-to-end gram_matrix:")
    for n, m in grid[: 4 if not args.quick else 2]:
        values = rng.standard_normal((n, m))
        numpy_time = time_gram("numpy", values, repeats)
        compiled_time = time_gram("compiled", values, repeats)
        print(
            f"{n:>6} {m:>4} {numpy_time:>12.4f} {compiled_time:>13.4f} "
            f"{numpy_time / compiled_time:>7.2f}x"
        )


if __name__ == "__main__":
    main()
