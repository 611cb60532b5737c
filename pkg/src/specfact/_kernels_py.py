"""Pure-Python reference versions of the compiled kernels."""
from __future__ import annotations

import numpy as np


def ss_simulate(A, B, C, D, E, x0):
    """Run ``x+ = A x + B e``, ``y = C x + D e`` over the rows of ``E``.

    Returns
    -------
    Y : (N, q) ndarray
    x : (n,) ndarray
        Final state.
    """
    N = E.shape[0]
    Y = np.empty((N, C.shape[0]))
    x = np.array(x0, dtype=float)
    for t in range(N):
        e = E[t]
        Y[t] = C @ x + D @ e
        x = A @ x + B @ e
    return Y, x


def iir_filter(b, a, x):
    """Direct-form filter ``a[0] y[t] = sum b[k] x[t-k] - sum_{k>0} a[k] y[t-k]``."""
    nb, na, N = len(b), len(a), len(x)
    y = np.empty(N)
    for t in range(N):
        acc = 0.0
        for k in range(min(nb, t + 1)):
            acc += b[k] * x[t - k]
        for k in range(1, min(na, t + 1)):
            acc -= a[k] * y[t - k]
        y[t] = acc / a[0]
    return y
