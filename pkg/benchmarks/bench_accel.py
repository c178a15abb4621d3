"""Timing comparison of the jit and pure-numpy edge kernels.

Prints per-call times for the three hot loops on a 2D edge set, plus a
representative nonlinear trajectory run. The numpy evolve row comes from
a subprocess with STRIPFLOW_NO_NUMBA=1 so the import-time backend
selection is exercised for real; the kernel rows call both twins
directly.

Usage: python benchmarks/bench_accel.py [--repeat N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

import stripflow as sf
from stripflow import _accel as A


def best_of(fn, repeat, inner=5):
    worst = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(inner):
            fn()
        worst = min(worst, (time.perf_counter() - t0) / inner)
    return worst


def edge_ops():
    grid = sf.build_grid(sf.DomainBox(2, (0.0, 0.0), (1.0, 1.0)),
                         1.0 / 32.0, 0.125)
    return sf.assemble(grid, sf.tent_kernel(0.125, 2), sf.EXCLUDE_STRIP_STRIP)


def evolve_seconds():
    op = sf.assemble(sf.build_grid(sf.DomainBox(1, (0.0,), (1.0,)),
                                   1.0 / 64.0, 0.125),
                     sf.tent_kernel(0.25, 1), sf.EXCLUDE_STRIP_STRIP)
    rng = np.random.default_rng(0)
    u0 = sf.StripField(rng.standard_normal(op.n_strip), op.grid)
    spec = sf.ProblemSpec("plaplace", p=3.0)
    t0 = time.perf_counter()
    sf.evolve(op, spec, u0, 0.1, 1e-3)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=7)
    ap.add_argument("--evolve-only", action="store_true",
                    help=argparse.SUPPRESS)
    args = ap.parse_args()

    if args.evolve_only:
        evolve_seconds()  # warm the jit or numpy path
        print(f"{evolve_seconds():.17g}")
        return

    op = edge_ops()
    rng = np.random.default_rng(1)
    vals = rng.standard_normal(op.n)
    hess = np.zeros((op.n, op.n))
    p, eps = 3.0, 0.0
    n_edges = op.act_rows.shape[0]
    print(f"backend: {A.backend()}  nodes: {op.n}  edges: {n_edges}")

    pairs = [
        ("phi_row_sums",
         lambda: A._phi_row_sums_jit(op.act_rows, op.act_cols, op.act_w,
                                     vals, vals, p, eps, op.n),
         lambda: A._phi_row_sums_np(op.act_rows, op.act_cols, op.act_w,
                                    vals, vals, p, eps, op.n)),
        ("edge_power_sum",
         lambda: A._edge_power_sum_jit(op.act_rows, op.act_cols, op.act_coef,
                                       vals, p),
         lambda: A._edge_power_sum_np(op.act_rows, op.act_cols, op.act_coef,
                                      vals, p)),
        ("hessian_accumulate",
         lambda: A._hessian_accumulate_jit(op.act_rows, op.act_cols,
                                           op.act_coef, vals, p, eps, hess),
         lambda: A._hessian_accumulate_np(op.act_rows, op.act_cols,
                                          op.act_coef, vals, p, eps, hess)),
    ]

    print(f"{'':24s}{'numba':>12s}{'numpy':>12s}{'ratio':>9s}")
    if not A.HAVE_NUMBA:
        for name, _, fn_np in pairs:
            t = best_of(fn_np, args.repeat)
            print(f"{name:24s}{'-':>12s}{t * 1e6:>10.1f}us{'-':>9s}")
        return

    for name, fn_jit, fn_np in pairs:
        fn_jit()  # compile outside the timed region
        t_jit = best_of(fn_jit, args.repeat)
        t_np = best_of(fn_np, args.repeat)
        print(f"{name:24s}{t_jit * 1e6:>10.1f}us{t_np * 1e6:>10.1f}us"
              f"{t_np / t_jit:>8.1f}x")

    t_jit = evolve_seconds()
    t_jit = min(t_jit, evolve_seconds())
    env = dict(os.environ, STRIPFLOW_NO_NUMBA="1")
    out = subprocess.run([sys.executable, __file__, "--evolve-only"],
                         env=env, capture_output=True, text=True, check=True)
    t_np = float(out.stdout.strip())
    print(f"{'evolve p=3, 100 steps':24s}{t_jit:>11.3f}s{t_np:>11.3f}s"
          f"{t_np / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
