"""Compare the compiled and NumPy stencil reductions.

Usage::

    python benchmarks/bench_kernels.py [--n 64] [--repeat 20]

Each kernel runs on a ball stencil of radius ``n/4`` nodes drawn from a
random ``(3, n, n, n)`` lattice.  The end-to-end row times one
``quantity_sweep`` with each backend forced in turn.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from nsreg import kernels


def stencil(n: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    values = np.ascontiguousarray(rng.standard_normal((3, n, n, n)))
    c = np.arange(n) - n // 2
    X, Y, Z = np.meshgrid(c, c, c, indexing="ij")
    inside = X**2 + Y**2 + Z**2 <= (n // 4) ** 2
    i, j, k = (np.ascontiguousarray(a.astype(np.intp)) for a in np.nonzero(inside))
    w = np.ascontiguousarray(rng.random(i.size))
    return values, i, j, k, w


def kernel_table(n: int, repeat: int) -> list[tuple[str, float, float | None]]:
    values, i, j, k, w = stencil(n)
    scalar = np.ascontiguousarray(values[0])
    calls = {
        "power_sum(p=3)": lambda b: b.power_sum(values, i, j, k, w, 3.0),
        "power_sum(p=2)": lambda b: b.power_sum(values, i, j, k, w, 2.0),
        "max_norm": lambda b: b.max_norm(values, i, j, k),
        "weighted_sum": lambda b: b.weighted_sum(scalar, i, j, k, w),
        "slice_sums": lambda b: b.slice_sums(scalar, i[: n * n], j[: n * n], w[: n * n]),
    }
    rows = []
    for name, call in calls.items():
        py = min(timeit.repeat(lambda: call(kernels.python_backend), number=1, repeat=repeat))
        cy = None
        if kernels.compiled_backend is not None:
            cy = min(timeit.repeat(lambda: call(kernels.compiled_backend), number=1, repeat=repeat))
        rows.append((name, py, cy))
    return rows


SWEEP = """
import time
from nsreg import ExponentPair, FlowParams, Grid3, generate_field, quantity_sweep, kernels
U = generate_field("taylor_green_2d", FlowParams(end_time=1.0, dt=1 / 16), Grid3({n}))
t = time.perf_counter()
quantity_sweep(["G", "A"], U, ExponentPair(3, 3), z0=(0.3, 0.2, 0.1), scales=(1.0, 0.5))
print(kernels.BACKEND, time.perf_counter() - t)
"""


def sweep_time(n: int, pure: bool) -> tuple[str, float]:
    env = dict(os.environ, NSREG_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", SWEEP.format(n=n)], env=env, capture_output=True, text=True,
                         check=True)
    backend, seconds = out.stdout.split()
    return backend, float(seconds)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)

    print(f"nodes per axis: {args.n}; selected backend: {kernels.BACKEND}")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}")
    for name, py, cy in kernel_table(args.n, args.repeat):
        if cy is None:
            print(f"{name:<18}{1e3 * py:>12.3f}{'n/a':>13}{'':>9}")
        else:
            print(f"{name:<18}{1e3 * py:>12.3f}{1e3 * cy:>13.3f}{py / cy:>8.1f}x")
    b_py, t_py = sweep_time(args.n, pure=True)
    b_cy, t_cy = sweep_time(args.n, pure=False)
    print(f"quantity_sweep end to end: {b_py} {t_py:.3f} s, {b_cy} {t_cy:.3f} s")


if __name__ == "__main__":
    main()
