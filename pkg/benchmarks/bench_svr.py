#!/usr/bin/env python3
"""Benchmark the compiled solver kernel against the numpy fallback.

Times svr_solve on representative Monte Carlo workloads (the solver is the
hot loop of every sweep) and prints one row per problem size with the
compiled/python speedup. Run:

    python3 benchmarks/bench_svr.py [--repeats 5]
"""

import argparse
import time

from sarlib import _kernels
from sarlib._kernels import python_svr_solve
from sarlib.rng import RandomStream


def make_problem(n, p, seed=0):
    s = RandomStream(seed)
    x = s.normals(n * p).reshape(n, p)
    beta = s.normals(p)
    y = x @ beta + 0.5 * s.normals(n)
    return x, y


def time_solver(solver, x, y, loss_kind, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        solver(x, y, loss_kind, 0.0, 10.0, 5000, 1e-8, 0.1)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not _kernels.HAVE_COMPILED:
        print("compiled kernel not available; timing the numpy fallback only")

    print(f"{'n':>6} {'p':>3} {'loss':>4} {'python':>10} {'compiled':>10} "
          f"{'speedup':>8}")
    for n, p in [(20, 1), (100, 1), (300, 1), (300, 6), (1000, 3)]:
        x, y = make_problem(n, p)
        for loss_kind, name in ((0, "l1"), (1, "l2")):
            t_py = time_solver(python_svr_solve, x, y, loss_kind, args.repeats)
            if _kernels.HAVE_COMPILED:
                t_cy = time_solver(_kernels.compiled_svr_solve, x, y, loss_kind,
                                   args.repeats)
                print(f"{n:>6} {p:>3} {name:>4} {t_py * 1e3:>8.1f}ms "
                      f"{t_cy * 1e3:>8.1f}ms {t_py / t_cy:>7.1f}x")
            else:
                print(f"{n:>6} {p:>3} {name:>4} {t_py * 1e3:>8.1f}ms "
                      f"{'-':>10} {'-':>8}")


if __name__ == "__main__":
    main()
