# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for state-space simulation and IIR filtering."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def ss_simulate(const double[:, ::1] A, const double[:, ::1] B, const double[:, ::1] C,
                const double[:, ::1] D, const double[:, ::1] E, const double[::1] x0):
    """Run ``x+ = A x + B e``, ``y = C x + D e`` over the rows of ``E``."""
    cdef Py_ssize_t n = A.shape[0], m = B.shape[1], q = C.shape[0], N = E.shape[0]
    cdef Py_ssize_t t, i, j
    cdef double acc
    Y_arr = np.empty((N, q))
    x_arr = np.array(x0, dtype=np.float64, copy=True)
    xn_arr = np.empty(n)
    cdef double[:, ::1] Y = Y_arr
    cdef double[::1] x = x_arr
    cdef double[::1] xn = xn_arr
    for t in range(N):
        for i in range(q):
            acc = 0.0
            for j in range(n):
                acc += C[i, j] * x[j]
            for j in range(m):
                acc += D[i, j] * E[t, j]
            Y[t, i] = acc
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * x[j]
            for j in range(m):
                acc += B[i, j] * E[t, j]
            xn[i] = acc
        for i in range(n):
            x[i] = xn[i]
    return Y_arr, x_arr


def iir_filter(const double[::1] b, const double[::1] a, const double[::1] x):
    """Direct-form filter ``a[0] y[t] = sum b[k] x[t-k] - sum_{k>0} a[k] y[t-k]``."""
    cdef Py_ssize_t nb = b.shape[0], na = a.shape[0], N = x.shape[0]
    cdef Py_ssize_t t, k
    cdef double acc, a0 = a[0]
    y_arr = np.empty(N)
    cdef double[::1] y = y_arr
    for t in range(N):
        acc = 0.0
        for k in range(nb):
            if k > t:
                break
            acc += b[k] * x[t - k]
        for k in range(1, na):
            if k > t:
                break
            acc -= a[k] * y[t - k]
        y[t] = acc / a0
    return y_arr
