"""Compiled vs numpy kernels: wall time per call on representative workloads.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``.
"""
import argparse
import timeit

import numpy as np

from schifferlab import _pykernels

try:
    from schifferlab import _ckernels
except ImportError:
    _ckernels = None


def workloads(rng):
    x = np.linspace(0.0, 40.0, 4096)
    traces = rng.standard_normal((256, 4096))
    yy, xx = np.mgrid[-6:6:257j, -6:6:257j]
    field = np.cos(xx) * np.cos(yy) - 0.1
    saddle = (rng.random((256, 256)) > 0.5).astype(np.uint8)
    return {
        "bessel_table n<=30, 4096 points": lambda k: k.bessel_table(30, x),
        "cyclic_sign_changes 256 x 4096": lambda k: k.cyclic_sign_changes(traces, 1e-12),
        "marching_squares 256 x 256 cells": lambda k: k.marching_squares(field, saddle),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy fallback is timed")
    print(f"{'kernel':36s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}")
    for name, call in workloads(np.random.default_rng(0)).items():
        t_py = min(timeit.repeat(lambda: call(_pykernels), number=1, repeat=args.repeat))
        if _ckernels is None:
            print(f"{name:36s} {1e3 * t_py:10.2f} {'-':>10s} {'-':>8s}")
            continue
        t_c = min(timeit.repeat(lambda: call(_ckernels), number=1, repeat=args.repeat))
        print(f"{name:36s} {1e3 * t_py:10.2f} {1e3 * t_c:10.2f} {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
