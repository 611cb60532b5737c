"""Compare compiled and pure-Python kernels.

Run with ``python benchmarks/bench_kernels.py [--N 20000] [--repeat 5]``.
"""
import argparse
import timeit

import numpy as np

from specfact import _kernels_py as py
from specfact import kernels

try:
    from specfact import _ckernels as cy
except ImportError:  # pragma: no cover
    cy = None


def cases(N, rng):
    n, m, q = 6, 1, 3
    A = rng.standard_normal((n, n))
    A *= 0.9 / max(abs(np.linalg.eigvals(A)))
    ss = (np.ascontiguousarray(A), rng.standard_normal((n, m)), rng.standard_normal((q, n)),
          rng.standard_normal((q, m)), rng.standard_normal((N, m)), np.zeros(n))
    b = np.array([1.0, 0.528])
    a = np.array([1.0, -0.255])
    iir = (b, a, rng.standard_normal(N))
    return {"ss_simulate": ss, "iir_filter": iir}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"dispatch backend: {kernels.BACKEND}")
    print(f"{'kernel':<12} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for name, arg in cases(args.N, rng).items():
        t_py = min(timeit.repeat(lambda: getattr(py, name)(*arg), number=1,
                                 repeat=args.repeat))
        if cy is None:
            print(f"{name:<12} {1e3 * t_py:12.2f} {'n/a':>12} {'n/a':>8}")
            continue
        t_cy = min(timeit.repeat(lambda: getattr(cy, name)(*arg), number=1,
                                 repeat=args.repeat))
        print(f"{name:<12} {1e3 * t_py:12.2f} {1e3 * t_cy:12.3f} {t_py / t_cy:8.1f}")


if __name__ == "__main__":
    main()
