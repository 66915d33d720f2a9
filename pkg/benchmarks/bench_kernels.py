#!/usr/bin/env python3
"""Time the numba kernels against the pure-numpy fallbacks.

Runs every hot kernel on a representative workload with both backends,
checks the outputs are bit-identical, and prints a timing table.

    python benchmarks/bench_kernels.py [--repeat 5]

The numba timings exclude JIT compilation (one warm-up call per
kernel).  Exits nonzero if any kernel disagrees between backends.
"""

import argparse
import sys
import time

import numpy as np

from percolab._backend import get_kernels


def _best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def _equal(a, b):
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def workloads():
    seed = np.uint64(12345)
    n = 40_000
    xs = np.arange(n, dtype=np.int64) * 2
    ts = np.zeros(n, np.int64)
    dirs = np.tile(np.array([1, -1], np.int64), n // 2)
    x0s = np.arange(200, dtype=np.int64) * 1604
    s_vals = np.array([0.0, 0.5, 1.0, 2.0])
    pos = np.arange(401, dtype=np.int64)  # straight path for break_mask
    return [
        ("edge_weights", lambda k: k.edge_weights(seed, xs, ts, dirs)),
        ("rho_trace", lambda k: k.rho_trace(seed, 0.8, 0, 0, 400, 420)),
        ("gamma_trace", lambda k: k.gamma_trace(seed, 0.8, 0, 0, 460)),
        ("break_mask", lambda k: k.break_mask(seed, 0.8, pos, 0, 60)),
        ("max_depth_reached", lambda k: k.max_depth_reached(seed, 0.8, 0, 0, 90)),
        ("web_paths", lambda k: k.web_paths(seed, 0.05, x0s, 0, 400, 2)),
        ("dyn_flip_counts", lambda k: k.dyn_flip_counts(seed, xs, ts, 1.0, 2.0)),
        ("dyn_edge_states", lambda k: k.dyn_edge_states(seed, 0.8, 1.0, xs, ts, (dirs > 0).astype(np.int64), s_vals)),
        ("dyn_web_paths", lambda k: k.dyn_web_paths(seed, 1.0, 0.5, x0s, 0, 400)),
        ("gap_walk_final", lambda k: k.gap_walk_final(seed, 1.0, 0.0, 0.02, 1250, 2000)),
    ]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions (best-of)")
    args = ap.parse_args(argv)

    try:
        knb = get_kernels("numba")
    except ImportError:
        print("numba not importable; nothing to compare", file=sys.stderr)
        return 1
    knp = get_kernels("numpy")

    rows = []
    mismatches = 0
    for name, call in workloads():
        call(knb)  # warm-up: JIT compile outside the timed region
        out_nb, t_nb = _best_of(lambda: call(knb), args.repeat)
        out_np, t_np = _best_of(lambda: call(knp), args.repeat)
        same = _equal(out_nb, out_np)
        mismatches += not same
        rows.append((name, t_nb * 1e3, t_np * 1e3, t_np / t_nb, same))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'numba ms':>9}  {'numpy ms':>9}  {'speedup':>7}  match")
    for name, ms_nb, ms_np, speed, same in rows:
        print(f"{name:<{width}}  {ms_nb:9.3f}  {ms_np:9.3f}  {speed:6.1f}x  {'yes' if same else 'NO'}")
    if mismatches:
        print(f"\n{mismatches} kernel(s) disagree between backends", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
