"""Compiled kernels against the numpy fallback on the hot paths.

    python benchmarks/bench_kernels.py [--repeat N]

Both implementations are imported directly, so VALMIN_PURE has no effect here.
"""
import argparse
import time

import numpy as np

from valmin import catalog
from valmin._kernels import _pykernels as py
from valmin.valuation import Truncation

try:
    from valmin._kernels import _ckernels as cy
except ImportError:
    cy = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    # (label, spec name, truncation level)
    yield "levels", "prufer_rr2", 16
    yield "levels", "elem_alternating", 11
    yield "affine_levels x3", "prufer_rr2", 16
    yield "affine_levels x3", "elem_growing", 10
    yield "pair_scan", "prufer_std", 8


def run_case(impl, label, t, rows):
    shift = rows[len(rows) // 3]
    if label == "levels":
        return lambda: impl.levels(rows, t.p, t.depth, t.need, t.offs, t.monotone)
    if label.startswith("affine"):
        return lambda: impl.affine_levels(rows, 3, shift, t.moduli, t.p, t.depth, t.need,
                                          t.offs, t.monotone)
    return lambda: impl.pair_scan(rows, t.moduli, t.p, t.depth, t.need, t.offs, t.monotone)


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if cy is None:
        print("compiled kernels not built; only the numpy fallback is available")
    print(f"{'kernel':<18} {'spec':<18} {'K':>3} {'rows':>9} {'numpy s':>9} {'cython s':>9} {'speedup':>8}")
    for label, name, K in cases():
        t = Truncation(catalog.load(name), K)
        rows = t.rows()
        tp = best_of(run_case(py, label, t, rows), args.repeat)
        if cy is None:
            print(f"{label:<18} {name:<18} {K:>3} {len(rows):>9} {tp:>9.4f} {'-':>9} {'-':>8}")
            continue
        if not same(run_case(py, label, t, rows)(), run_case(cy, label, t, rows)()):
            raise SystemExit(f"{label} on {name}: implementations disagree")
        tc = best_of(run_case(cy, label, t, rows), args.repeat)
        print(f"{label:<18} {name:<18} {K:>3} {len(rows):>9} {tp:>9.4f} {tc:>9.4f} {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
