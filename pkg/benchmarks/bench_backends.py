#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure NumPy/Python fallbacks.

Runs each kernel on a representative workload under both backends and
prints a timing table.  The numba flavor is warmed once so compile time is
reported separately from steady-state throughput.

Usage: python3 benchmarks/bench_backends.py [--p 499] [--repeats 3]
"""

import argparse
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import numpy as np

from markoff import action, ff, kernels, surface, t2


def timed(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench(name, workloads, repeats):
    impls = kernels.implementations(name)
    if "numba" not in impls:
        print(f"{name:<18} numba unavailable; skipping comparison")
        return
    args = workloads[name]()
    t0 = time.perf_counter()
    impls["numba"](*args)
    compile_s = time.perf_counter() - t0
    nb, out_nb = timed(impls["numba"], *args, repeats=repeats)
    py, out_py = timed(impls["numpy"], *args, repeats=repeats)
    if not isinstance(out_nb, tuple):
        out_nb, out_py = (out_nb,), (out_py,)
    same = all(np.array_equal(a, b) for a, b in zip(out_nb, out_py))
    print(f"{name:<18} numba {nb*1e3:9.2f} ms   numpy {py*1e3:9.2f} ms   "
          f"speedup {py/nb:7.1f}x   warm-start {compile_s*1e3:7.1f} ms   agree={same}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--p", type=int, default=499, help="prime for table workloads")
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    p = args.p

    tab = surface.prime_table(p)
    sqrt_tab = ff.sqrt_table(p)
    perms = action.perm_set(p, "blocks")
    rot1 = perms[0]
    gd = t2.group_data(11)
    m = 4000
    rng = np.random.default_rng(0)
    pa = rng.integers(0, gd.keys.shape[0], m)
    pb = rng.integers(0, gd.keys.shape[0], m)
    ps = ff.primes_up_to(200_000)
    smalls = ff.primes_up_to(600)

    workloads = {
        "enumerate_codes": lambda: (p, sqrt_tab, (p + 1) // 2),
        "orbit_labels": lambda: (perms,),
        "min_block_labels": lambda: (perms, 0, tab.block_count // 2),
        "cycle_info": lambda: (rot1,),
        "closure_sizes": lambda: (gd.table, pa, pb, gd.identity),
        "quad_orders": lambda: (ps, 3, smalls),
    }

    print(f"backend self-report: {kernels.BACKEND}")
    print(f"table workload: p = {p}, |Y*(p)| = {tab.block_count}, "
          f"closure pairs = {m} over PSL(2,11), order scan to 2e5")
    for name in workloads:
        bench(name, workloads, args.repeats)


if __name__ == "__main__":
    main()
