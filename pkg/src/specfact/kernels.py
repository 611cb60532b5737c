"""Kernel dispatch: compiled extension when available, Python otherwise.

Set ``SPECFACT_PURE_PYTHON=1`` to force the Python implementation.
"""
from __future__ import annotations

import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py
if os.environ.get("SPECFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py


def ss_simulate(A, B, C, D, E, x0=None):
    """Simulate a discrete state-space model driven by the rows of ``E``.

    Parameters
    ----------
    A, B, C, D : array_like
        Realization with ``A`` of size ``n x n``.
    E : (N, m) array_like
        Input sequence.
    x0 : (n,) array_like, optional
        Initial state (zero by default).

    Returns
    -------
    Y : (N, q) ndarray
    x : (n,) ndarray
        State after the last step.
    """
    A = np.ascontiguousarray(np.atleast_2d(A), dtype=np.float64)
    n = A.shape[0]
    E = np.ascontiguousarray(np.asarray(E, dtype=np.float64).reshape(len(E), -1))
    m = E.shape[1]
    B = np.ascontiguousarray(np.asarray(B, dtype=np.float64).reshape(n, m))
    D = np.ascontiguousarray(np.asarray(D, dtype=np.float64).reshape(-1, m))
    C = np.ascontiguousarray(np.asarray(C, dtype=np.float64).reshape(D.shape[0], n))
    x0 = np.zeros(n) if x0 is None else np.ascontiguousarray(x0, dtype=np.float64)
    return _impl.ss_simulate(A, B, C, D, E, x0)


def iir_filter(b, a, x):
    """Filter ``x`` through ``B(q^-1)/A(q^-1)`` with zero initial conditions.

    Coefficients are in increasing powers of the delay operator, as in
    :func:`scipy.signal.lfilter`.
    """
    b = np.ascontiguousarray(np.atleast_1d(b), dtype=np.float64)
    a = np.ascontiguousarray(np.atleast_1d(a), dtype=np.float64)
    x = np.ascontiguousarray(np.atleast_1d(x), dtype=np.float64)
    if a[0] == 0.0:
        raise ValueError("a[0] must be nonzero")
    return _impl.iir_filter(b, a, x)


__all__ = ["BACKEND", "ss_simulate", "iir_filter"]
