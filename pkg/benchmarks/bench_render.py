#!/usr/bin/env python3
"""Forward/backward render timing, numba kernels vs the numpy fallback.

Usage:
    python3 benchmarks/bench_render.py [--size 64] [--strokes 20] [--reps 50]

The numba column is skipped when numba is not installed. The first numba
call pays JIT compilation; it is excluded by a warmup pass.
"""

import argparse
import time

import numpy as np

from synesthesia.backend import get_kernels
from synesthesia.render import render_plan, render_plan_vjp
from synesthesia.strokes import init_plan


def _time(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(name, plan, upstream, reps):
    kern = get_kernels(name)
    render_plan(plan, kernels=kern)  # warmup / JIT
    render_plan_vjp(plan, upstream, kernels=kern)
    fwd = _time(lambda: render_plan(plan, kernels=kern), reps)
    bwd = _time(lambda: render_plan_vjp(plan, upstream, kernels=kern), reps)
    return fwd, bwd


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=64, help="canvas side in px")
    ap.add_argument("--strokes", type=int, default=20)
    ap.add_argument("--reps", type=int, default=50,
                    help="repetitions; best-of is reported")
    args = ap.parse_args()

    plan = init_plan("uniform-random", args.strokes, 0,
                     width_px=args.size, height_px=args.size)
    upstream = np.random.default_rng(0).uniform(
        -1, 1, (args.size, args.size, 3))

    backends = ["numpy"]
    try:
        import numba  # noqa: F401
        backends.insert(0, "numba")
    except ImportError:
        print("numba not installed; timing the numpy fallback only")

    print(f"{args.size}x{args.size} canvas, {args.strokes} strokes, "
          f"best of {args.reps}")
    print(f"{'backend':8s} {'forward':>12s} {'backward':>12s}")
    rows = {}
    for name in backends:
        fwd, bwd = bench_backend(name, plan, upstream, args.reps)
        rows[name] = (fwd, bwd)
        print(f"{name:8s} {fwd * 1e3:9.2f} ms {bwd * 1e3:9.2f} ms")
    if len(rows) == 2:
        f_ratio = rows["numpy"][0] / rows["numba"][0]
        b_ratio = rows["numpy"][1] / rows["numba"][1]
        print(f"numba speedup: {f_ratio:.2f}x forward, {b_ratio:.2f}x backward")


if __name__ == "__main__":
    main()
