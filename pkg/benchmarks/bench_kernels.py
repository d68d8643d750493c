#!/usr/bin/env python3
"""Benchmark the JIT-compiled kernels against the pure-Python/numpy fallback.

Usage:
    python3 benchmarks/bench_kernels.py [--repeats 5]

With numba installed (and SURVROUTE_DISABLE_NUMBA unset) each kernel is timed
twice: compiled, and via its uncompiled implementation. The dominance matrix
compares the jitted loop kernel against the vectorized numpy fallback.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from survroute import kernels
from survroute.kernels import python_impl
from survroute.netmodel import parse_instance


def synthetic_instance(n_mr: int, links_per_mr: int, seed: int = 0):
    """Random feasible instance: every MR can reach an AR, extra MR-MR links allowed."""
    rng = np.random.default_rng(seed)
    lines = ["BS b0 0.05", "BS b1 0.2", "AR a0 b0", "AR a1 b1"]
    mrs = [f"m{i:03d}" for i in range(n_mr)]
    lines += [f"MR {m}" for m in mrs]
    for i, m in enumerate(mrs):
        parents = {f"a{rng.integers(2)}"}
        while len(parents) < links_per_mr:
            j = int(rng.integers(n_mr))
            if j != i:
                parents.add(mrs[j])
        for p in sorted(parents):
            lines.append(f"LINK {m} {p} {rng.uniform(0.5, 5.0):.3f} {rng.uniform(0.0, 0.3):.3f}")
    lines.append("MAXDEPTH 6")
    return parse_instance("\n".join(lines))


def best_of(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(42)
    rows = []

    # single-assignment evaluation walks
    inst = synthetic_instance(n_mr=40, links_per_mr=6, seed=1)
    c = inst.compiled
    choice_batch = np.stack(
        [rng.integers(0, c.radices, size=inst.n_mr).astype(np.int64) for _ in range(2000)]
    )
    eval_args = (c.mr_link_offset, c.link_parent_code, c.link_cost, c.link_fail,
                 c.ar_bs_fail, inst.n_ar, inst.max_depth)

    def eval_many(fn):
        def body():
            for row in choice_batch:
                fn(row, *eval_args)
        return body

    # exhaustive enumeration (the oracle's inner loop)
    small = synthetic_instance(n_mr=6, links_per_mr=5, seed=2)
    sc = small.compiled
    enum_args = (sc.radices, sc.mr_link_offset, sc.link_parent_code, sc.link_cost,
                 sc.link_fail, sc.ar_bs_fail, small.n_ar, small.max_depth)

    # batch objective-space kernels
    F = rng.random((200, 2))
    front = np.sort(rng.random((500, 2)), axis=0)
    front[:, 1] = front[::-1, 1]

    cases = [
        ("eval_route x2000 (40 MRs)", eval_many(kernels.eval_route), eval_many(python_impl(kernels.eval_route))),
        (f"enumerate_routes ({sc.search_space} assignments)",
         lambda: kernels.enumerate_routes(*enum_args),
         lambda: python_impl(kernels.enumerate_routes)(*enum_args)),
        ("dominance_matrix (200x2)",
         lambda: kernels.dominance_matrix(F),
         lambda: kernels._dominance_matrix_numpy(F)),
        ("crowding_distance (200x2)",
         lambda: kernels.crowding_distance(F),
         lambda: python_impl(kernels.crowding_distance)(F)),
        ("hv2d_sweep (500 pts)",
         lambda: kernels.hv2d_sweep(front, 2.0, 2.0),
         lambda: python_impl(kernels.hv2d_sweep)(front, 2.0, 2.0)),
    ]

    if kernels.NUMBA_ENABLED:
        kernels.warmup()
        print(f"{'kernel':<40} {'jit':>12} {'fallback':>12} {'speedup':>9}")
        for name, fast, slow in cases:
            fast()  # compile before timing
            t_fast = best_of(fast, args.repeats)
            t_slow = best_of(slow, args.repeats)
            rows.append((name, t_fast, t_slow))
            print(f"{name:<40} {t_fast * 1e3:>10.2f}ms {t_slow * 1e3:>10.2f}ms {t_slow / t_fast:>8.1f}x")
    else:
        print("numba disabled (SURVROUTE_DISABLE_NUMBA set or numba missing); timing fallback only")
        print(f"{'kernel':<40} {'fallback':>12}")
        for name, fast, _slow in cases:
            print(f"{name:<40} {best_of(fast, args.repeats) * 1e3:>10.2f}ms")


if __name__ == "__main__":
    main()
