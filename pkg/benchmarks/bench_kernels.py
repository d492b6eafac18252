"""Compare the numba and numpy kernels on tree descents and sketching.

Usage::

    python benchmarks/bench_kernels.py [--draws 262144] [--repeats 5]

Both backends are imported side by side from ``qicca._kernels`` so one run
covers both regardless of ``QICCA_BACKEND``.  Reported times are best-of
``--repeats`` nanoseconds per draw.
"""
import argparse
import time

import numpy as np

from qicca import _kernels as k
from qicca._backend import HAVE_NUMBA


def best_of(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def make_tree(n, rng):
    cap = k.capacity_for(n)
    nodes = np.zeros(2 * cap)
    nodes[cap:cap + n] = rng.random(n)
    return k.fill_internal(nodes), cap


def make_rows(n_rows, width, rng):
    cap = k.capacity_for(width)
    nodes = np.zeros((n_rows, 2 * cap))
    nodes[:, cap:cap + width] = rng.random((n_rows, width))
    return k.fill_internal(nodes), cap


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=2**18)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    M = args.draws
    if not HAVE_NUMBA:
        print("numba not installed; the *_nb kernels run as plain Python")

    print(f"single-tree descent, {M} draws, ns/draw")
    print(f"{'leaves':>10} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for exp in (10, 14, 17, 20, 22):
        nodes, cap = make_tree(2**exp, rng)
        t = rng.random(M) * nodes[1]
        k.descend_nb(nodes, cap, t[:8])
        a = best_of(lambda: k.descend_nb(nodes, cap, t), args.repeats) / M * 1e9
        b = best_of(lambda: k.descend_np(nodes, cap, t), args.repeats) / M * 1e9
        print(f"{'2^' + str(exp):>10} {a:10.1f} {b:10.1f} {b / a:8.1f}")

    print(f"\nper-row descent (two-stage column step), {M} draws, ns/draw")
    print(f"{'rows x cols':>12} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for n_rows, width in ((100, 1000), (1000, 4096), (2000, 16384)):
        nodes, cap = make_rows(n_rows, width, rng)
        rows = rng.integers(n_rows, size=M)
        t = rng.random(M) * nodes[rows, 1]
        k.descend_rows_nb(nodes, cap, rows[:8], t[:8])
        a = best_of(lambda: k.descend_rows_nb(nodes, cap, rows, t), args.repeats) / M * 1e9
        b = best_of(lambda: k.descend_rows_np(nodes, cap, rows, t), args.repeats) / M * 1e9
        print(f"{f'{n_rows}x{width}':>12} {a:10.1f} {b:10.1f} {b / a:8.1f}")

    print("\nlinear-scan baseline vs tree (numba), ns/draw")
    print(f"{'leaves':>10} {'scan':>12} {'tree':>10} {'scan/tree':>10}")
    for exp in (10, 14, 17, 20):
        n = 2**exp
        nodes, cap = make_tree(n, rng)
        w = nodes[cap:cap + n].copy()
        m = max(200, M >> max(0, exp - 8))
        t = rng.random(m) * nodes[1]
        k.linear_scan_nb(w, t[:4])
        s = best_of(lambda: k.linear_scan_nb(w, t), 3) / m * 1e9
        tt = rng.random(M) * nodes[1]
        d = best_of(lambda: k.descend_nb(nodes, cap, tt), args.repeats) / M * 1e9
        print(f"{'2^' + str(exp):>10} {s:12.1f} {d:10.1f} {s / d:10.0f}")


if __name__ == "__main__":
    main()
