"""Compiled kernels against the fallback selected by ``VCG_LAB_DISABLE_NUMBA``.

The fallback is measured in a child process with the flag set, so every
helper runs uncompiled there (graphic kernels interpreted, the uniform
kernel as vectorized numpy).  Both sides see the same cost matrices and the
outputs are compared.

    python benchmarks/bench_kernels.py [--reps N] [--fallback-reps N]
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

CASES = [
    # name, system, n, kernel
    ("uniform", "U(8,4)", 8, "uniform_batch"),
    ("definition", "K4", 4, "graphic_batch_definition"),
    ("replacement", "K4", 4, "graphic_batch_replacement"),
    ("definition", "K30", 30, "graphic_batch_definition"),
    ("replacement", "K30", 30, "graphic_batch_replacement"),
]


def run_case(kernel, n, reps, seed=1):
    from vcglab import kernels
    from vcglab.matroid import complete_graph
    from vcglab.sampling import CostModel, sample_batch

    if kernel == "uniform_batch":
        costs, _ = sample_batch(CostModel.iid("uniform", n), seed, 0, reps)
        fn = lambda c: kernels.uniform_batch(c, 4)          # noqa: E731
    else:
        g = complete_graph(n)
        eu, ev = g.edge_arrays()
        costs, _ = sample_batch(CostModel.iid("uniform", g.ground_size), seed, 0, reps)
        kern = getattr(kernels, kernel)
        fn = lambda c: kern(c, eu, ev, n)                   # noqa: E731
    fn(costs[:2])                                           # compile / warm up
    best = np.inf
    for _ in range(3):
        t = time.perf_counter()
        out = fn(costs)
        best = min(best, time.perf_counter() - t)
    return best / reps, out


def child(args):
    # fallback side: print per-rep seconds and outputs as JSON
    res = {}
    for name, label, n, kernel in CASES:
        reps = args.fallback_reps if n <= 8 else max(2, args.fallback_reps // 20)
        per, out = run_case(kernel, n, reps)
        res[f"{name}:{label}"] = {"per_rep": per, "reps": reps, "out": out.tolist()}
    print(json.dumps(res))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--reps", type=int, default=200000)
    ap.add_argument("--fallback-reps", type=int, default=2000)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        return child(args)

    from vcglab._accel import NUMBA_ENABLED
    if not NUMBA_ENABLED:
        raise SystemExit("numba is disabled in this process; unset VCG_LAB_DISABLE_NUMBA to compare")
    env = dict(os.environ, VCG_LAB_DISABLE_NUMBA="1")
    proc = subprocess.run([sys.executable, __file__, "--child", "--fallback-reps", str(args.fallback_reps)],
                          env=env, capture_output=True, text=True, check=True)
    fallback = json.loads(proc.stdout)

    print(f"{'kernel':<12} {'system':<7} {'numba us/rep':>13} {'fallback us/rep':>16} {'speedup':>8} {'max rel diff':>13}")
    for name, label, n, kernel in CASES:
        reps = args.reps if n <= 8 else max(2, args.reps // 100)
        per, out = run_case(kernel, n, reps)
        fb = fallback[f"{name}:{label}"]
        ref = np.array(fb["out"])
        diff = float(np.max(np.abs(out[:len(ref)] - ref) / np.maximum(1.0, np.abs(ref))))
        print(f"{name:<12} {label:<7} {per * 1e6:13.2f} {fb['per_rep'] * 1e6:16.2f} "
              f"{fb['per_rep'] / per:8.1f} {diff:13.1e}")


if __name__ == "__main__":
    main()
