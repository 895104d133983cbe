"""Benchmark the compiled kernel backend against the numpy fallback.

Times the shifted-sum and shifted-product-sum kernels on a few grid sizes
and node counts, checks that both backends agree bitwise, and prints a
small table with the speedup.

Usage: python benchmarks/bench_kernels.py [--repeats 5] [--nodes 512]
"""

import argparse
import importlib
import sys
import time

import numpy as np

from sphmax.kernels import _fallback


def _best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_case(compiled, shape, nodes, repeats, rng):
    values = rng.standard_normal(shape)
    offsets = rng.uniform(-max(shape), max(shape), size=(nodes, len(shape)))
    weights = rng.random(nodes)

    ref = _fallback.shifted_sum(values, offsets, weights)
    out = compiled.shifted_sum(values, offsets, weights)
    if not np.array_equal(ref, out):
        raise AssertionError(f"backends disagree on shape {shape}")

    t_fb = _best_of(lambda: _fallback.shifted_sum(values, offsets, weights), repeats)
    t_c = _best_of(lambda: compiled.shifted_sum(values, offsets, weights), repeats)
    return t_fb, t_c


def bench_product(compiled, cells, nodes, repeats, rng):
    f1 = rng.standard_normal((cells, cells))
    f2 = rng.standard_normal((cells, cells))
    off1 = rng.uniform(-cells, cells, size=(nodes, 2))
    off2 = rng.uniform(-cells, cells, size=(nodes, 2))
    weights = rng.random(nodes)

    ref = _fallback.shifted_product_sum(f1, f2, off1, off2, weights)
    out = compiled.shifted_product_sum(f1, f2, off1, off2, weights)
    if not np.array_equal(ref, out):
        raise AssertionError("backends disagree on the product kernel")

    t_fb = _best_of(
        lambda: _fallback.shifted_product_sum(f1, f2, off1, off2, weights), repeats)
    t_c = _best_of(
        lambda: compiled.shifted_product_sum(f1, f2, off1, off2, weights), repeats)
    return t_fb, t_c


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--nodes", type=int, default=512)
    args = parser.parse_args(argv)

    try:
        compiled = importlib.import_module("sphmax.kernels._core")
    except ImportError:
        print("compiled backend not built; nothing to compare", file=sys.stderr)
        return 1

    rng = np.random.default_rng(0)
    rows = []
    for shape in [(4096,), (128, 128), (256, 256), (24, 24, 24)]:
        t_fb, t_c = bench_case(compiled, shape, args.nodes, args.repeats, rng)
        rows.append(("sum " + "x".join(map(str, shape)), t_fb, t_c))
    for cells in (64, 128):
        t_fb, t_c = bench_product(compiled, cells, args.nodes, args.repeats, rng)
        rows.append((f"product {cells}x{cells}", t_fb, t_c))

    print(f"{'case':<18} {'fallback':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_fb, t_c in rows:
        print(f"{name:<18} {t_fb * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms {t_fb / t_c:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
