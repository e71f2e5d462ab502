"""Benchmark the compiled sparse-coding kernel against the NumPy fallback.

Times batch coding alone (the hot loop) and a full dictionary fit at a few
problem sizes. Run from the repository root:

    python3 benchmarks/bench_omp.py [--quick]
"""

import argparse
import sys
import time
import warnings
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from datm import kernels
from datm.dictionary import fit_matrix


def time_call(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_batch(n, v, k, t0, seed=0, repeats=3):
    rng = np.random.default_rng(seed)
    atoms = rng.normal(size=(n, k))
    atoms /= np.linalg.norm(atoms, axis=0)
    targets = rng.normal(size=(n, v))
    tol = 1e-9 * np.linalg.norm(targets, axis=0)
    rows = {}
    for backend in ("pure", "compiled"):
        if backend == "compiled" and not kernels.compiled_available():
            rows[backend] = None
            continue
        rows[backend] = time_call(
            lambda: kernels.batch_code(atoms, targets, t0, tol, backend=backend),
            repeats)
    return rows


def bench_fit(n, v, k, t0, max_iter, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.normal(size=(n, v))
    rows = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for backend in ("pure", "compiled"):
            if backend == "compiled" and not kernels.compiled_available():
                rows[backend] = None
                continue
            rows[backend] = time_call(
                lambda: fit_matrix(data, k, t0, max_iter=max_iter, seed=0,
                                   backend=backend),
                repeats=1)
    return rows


def report(label, rows):
    pure = rows["pure"]
    compiled = rows["compiled"]
    if compiled is None:
        print(f"{label:<42} pure {pure:8.3f}s   compiled: not built")
        return
    print(f"{label:<42} pure {pure:8.3f}s   compiled {compiled:8.3f}s   "
          f"speedup {pure / compiled:5.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="small sizes only")
    args = parser.parse_args()

    print(f"compiled kernel available: {kernels.compiled_available()}")
    print()
    print("batch sparse coding (one pass over all columns)")
    cases = [(30, 2000, 20, 3), (64, 5000, 100, 5)]
    if not args.quick:
        cases.append((200, 10000, 400, 5))
    for n, v, k, t0 in cases:
        report(f"  N={n} V={v} K={k} t0={t0}", bench_batch(n, v, k, t0))

    print()
    print("full dictionary fit")
    fit_cases = [(30, 2000, 20, 3, 10)]
    if not args.quick:
        fit_cases.append((64, 4000, 100, 5, 10))
    for n, v, k, t0, iters in fit_cases:
        report(f"  N={n} V={v} K={k} t0={t0} iters={iters}",
               bench_fit(n, v, k, t0, iters))


if __name__ == "__main__":
    main()
