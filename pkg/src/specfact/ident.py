"""Simulation and identification of low-rank processes ``y = W(z) e``.

The pipeline fits the deterministic relation ``y2 = H(z) y1`` by least
squares, an ARMA innovation model for a scalar ``y1`` by prediction-error
minimization, and combines both into a minimum-phase factor of ``y``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (DimensionMismatch, IllConditioned, NonConvergenceWarning, NotProper,
                     UnstableFilter, ValidationError)
from .factorization import FactorizationResult, factor_from_relation
from .kernels import iir_filter, ss_simulate
from .polynomial import Polynomial, RationalFunction
from .rational import RationalMatrix, strictly_stable
from .realization import minimal_realization

log = logging.getLogger(__name__)

COND_LIMIT = 1e12


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Samples ``y(t) = [y1(t); y2(t)]`` stored row-wise.

    Parameters
    ----------
    data : (N, m + p) ndarray
    m : int
        Number of leading components forming ``y1``.
    seed : int, optional
    metadata : dict
    """

    data: np.ndarray
    m: int
    seed: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2 or data.shape[0] == 0:
            raise ValidationError("time series needs at least one sample")
        if not np.all(np.isfinite(data)):
            raise ValidationError("time series contains non-finite values")
        if not 0 < self.m <= data.shape[1]:
            raise ValidationError(f"partition m={self.m} outside 1..{data.shape[1]}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def N(self):
        return self.data.shape[0]

    @property
    def p(self):
        return self.data.shape[1] - self.m

    @property
    def y1(self):
        return self.data[:, : self.m]

    @property
    def y2(self):
        return self.data[:, self.m:]


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------

def simulate_lowrank_process(W, N, seed=None, burn_in=200, m=None):
    """Drive a realization of ``W`` with unit-variance Gaussian noise.

    Parameters
    ----------
    W : RationalMatrix
        Stable proper discrete-time ``(m + p) x r`` filter.
    N : int
        Number of returned samples.
    seed : int, optional
        Seed for :func:`numpy.random.default_rng`.
    burn_in : int
        Samples discarded before the returned window.
    m : int, optional
        Partition index of the returned series (default ``W.cols``).

    Returns
    -------
    TimeSeries

    Raises
    ------
    UnstableFilter
        If ``W`` has a pole outside the open unit disk.
    """
    if W.variable != "z":
        raise ValidationError("simulation needs a discrete-time filter")
    if N <= 0 or burn_in < 0:
        raise ValidationError("N must be positive and burn_in non-negative")
    if not W.is_proper:
        raise NotProper("cannot simulate an improper filter")
    R = minimal_realization(W)
    eig = np.linalg.eigvals(R.A) if R.n else np.zeros(0)
    if not np.all(strictly_stable(eig, "z")):
        raise UnstableFilter(f"filter has poles outside the unit disk: {eig}")
    rng = np.random.default_rng(seed)
    E = rng.standard_normal((N + burn_in, W.cols))
    Y, _ = ss_simulate(R.A, R.B, R.C, R.D, E)
    part = W.cols if m is None else int(m)
    return TimeSeries(Y[burn_in:], min(part, W.rows), seed, {"burn_in": burn_in})


# ---------------------------------------------------------------------------
# deterministic relation
# ---------------------------------------------------------------------------

def _lagged(x, k, start):
    return x[start - k: len(x) - k]


def estimate_H_ls(ts, num_order, den_order):
    """Least-squares fit of ``den_i(z) y2_i = num_i(z) y1`` row by row.

    The denominator is monic of degree ``den_order``; each numerator has
    degree ``num_order <= den_order``.

    Parameters
    ----------
    ts : TimeSeries
    num_order, den_order : int

    Returns
    -------
    RationalMatrix
        ``p x m`` estimate of ``H``.

    Raises
    ------
    IllConditioned
        If the regression is underdetermined or its condition number exceeds
        ``1e12``.
    """
    if num_order < 0 or den_order < 0:
        raise ValidationError("orders must be non-negative")
    if num_order > den_order:
        raise NotProper("numerator order exceeds denominator order")
    y1, y2 = ts.y1, ts.y2
    m, p = ts.m, ts.p
    start = den_order
    n_rows = ts.N - start
    lags_num = range(den_order - num_order, den_order + 1)
    n_par = den_order + m * len(lags_num)
    if n_rows < n_par or n_rows <= 0:
        raise IllConditioned(f"{n_rows} equations for {n_par} parameters")
    rows = []
    for i in range(p):
        cols = [-_lagged(y2[:, i], k, start) for k in range(1, den_order + 1)]
        for j in range(m):
            cols += [_lagged(y1[:, j], k, start) for k in lags_num]
        Phi = np.column_stack(cols) if cols else np.zeros((n_rows, 0))
        cond = np.linalg.cond(Phi) if Phi.shape[1] else 1.0
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise IllConditioned(f"regression for row {i} has condition number {cond:.3g}")
        theta, *_ = np.linalg.lstsq(Phi, y2[start:, i], rcond=None)
        a = np.concatenate([[1.0], theta[:den_order]])
        den = Polynomial(a[::-1])
        entries = []
        for j in range(m):
            b = np.zeros(den_order + 1)
            off = den_order + j * len(lags_num)
            b[list(lags_num)] = theta[off: off + len(lags_num)]
            entries.append(RationalFunction(b[::-1], den, "z"))
        rows.append(entries)
    return RationalMatrix(rows, "z", shape=(p, m))


# ---------------------------------------------------------------------------
# ARMA prediction error fit
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ArmaFit:
    """Scalar ARMA estimate ``y = C(q^-1)/A(q^-1) e`` with ``var(e) = noise_variance``.

    ``model`` is the unit-variance innovation model ``sqrt(noise_variance) C/A``
    written in ``z``.
    """

    model: RationalFunction
    a: np.ndarray
    c: np.ndarray
    noise_variance: float
    converged: bool
    iterations: int

    @property
    def monic(self):
        """``C/A`` in ``z`` without the innovation gain."""
        return _delay_to_z(self.c, self.a)


def _delay_to_z(c, a):
    n = max(len(a), len(c)) - 1
    num = np.zeros(n + 1)
    den = np.zeros(n + 1)
    num[: len(c)] = c
    den[: len(a)] = a
    return RationalFunction(num[::-1], den[::-1], "z")


def _reflect(poly):
    """Reflect roots of a monic delay polynomial into the open unit disk.

    Returns the new coefficients and the factor by which the spectrum
    ``|poly(e^{iw})|^2`` shrinks.
    """
    if len(poly) <= 1:
        return np.asarray(poly, dtype=float), 1.0
    roots = np.roots(poly)
    out = np.abs(roots) > 1.0
    if not np.any(out):
        return np.asarray(poly, dtype=float), 1.0
    gain = float(np.prod(np.abs(roots[out])) ** 2)
    roots = np.where(out, 1.0 / np.conj(roots), roots)
    return np.real(np.poly(roots)), gain


def _residuals(y, a, c):
    return iir_filter(a, c, y)


def _hannan_rissanen(y, p, q):
    N = len(y)
    L = min(max(2 * (p + q), 10), max(N // 10, 1))
    if p + q == 0:
        return np.zeros(0), np.zeros(0)
    cols = [np.concatenate([np.zeros(k), y[:-k]]) for k in range(1, L + 1)]
    phi = np.column_stack(cols)
    ar, *_ = np.linalg.lstsq(phi[L:], y[L:], rcond=None)
    ehat = y - phi @ ar
    ehat[:L] = 0.0
    cols = ([-np.concatenate([np.zeros(k), y[:-k]]) for k in range(1, p + 1)]
            + [np.concatenate([np.zeros(k), ehat[:-k]]) for k in range(1, q + 1)])
    X = np.column_stack(cols)
    s = L + max(p, q)
    theta, *_ = np.linalg.lstsq(X[s:], y[s:], rcond=None)
    return theta[:p], theta[p:]


def estimate_arma_pem(y1, p_order, q_order, max_iter=200, tol=1e-10):
    """Prediction-error ARMA(p, q) fit by Gauss-Newton.

    Parameters
    ----------
    y1 : TimeSeries or (N,) array_like
        Scalar series.
    p_order, q_order : int
        Degrees of ``A`` and ``C`` in the delay operator.
    max_iter : int
        Iteration cap; reaching it emits :class:`NonConvergenceWarning`.
    tol : float
        Relative decrease of the cost used as stopping rule.

    Returns
    -------
    ArmaFit

    Raises
    ------
    IllConditioned
        If the series carries no variance or is too short for the orders.
    """
    y = ts_scalar(y1)
    N = len(y)
    if p_order < 0 or q_order < 0:
        raise ValidationError("orders must be non-negative")
    if N <= 4 * (p_order + q_order) + 2:
        raise IllConditioned(f"{N} samples are too few for ARMA({p_order},{q_order})")
    if not np.var(y) > 1e-14 * (1.0 + np.mean(y ** 2)):
        raise IllConditioned("series has no variance")
    ar, ma = _hannan_rissanen(y, p_order, q_order)
    a = np.concatenate([[1.0], ar])
    c, _ = _reflect(np.concatenate([[1.0], ma]))
    a, _ = _reflect(a)

    def cost(a, c):
        e = _residuals(y, a, c)
        return float(e @ e) / N, e

    V, e = cost(a, c)
    converged = p_order + q_order == 0
    it = 0
    while not converged and it < max_iter:
        it += 1
        yf = iir_filter([1.0], c, y)
        ef = iir_filter([1.0], c, e)
        cols = ([np.concatenate([np.zeros(k), yf[:-k]]) for k in range(1, p_order + 1)]
                + [-np.concatenate([np.zeros(k), ef[:-k]]) for k in range(1, q_order + 1)])
        J = np.column_stack(cols)
        step, *_ = np.linalg.lstsq(J, -e, rcond=None)
        mu = 1.0
        improved = False
        while mu > 1e-8:
            a_new = np.concatenate([[1.0], a[1:] + mu * step[:p_order]])
            c_new, _ = _reflect(np.concatenate([[1.0], c[1:] + mu * step[p_order:]]))
            a_new, _ = _reflect(a_new)
            V_new, e_new = cost(a_new, c_new)
            if V_new <= V:
                improved = True
                break
            mu *= 0.5
        if not improved:
            converged = True
            break
        rel = (V - V_new) / max(V, 1e-300)
        a, c, V, e = a_new, c_new, V_new, e_new
        if rel < tol or np.linalg.norm(mu * step) < 1e-10:
            converged = True
    if not converged:
        warnings.warn(f"ARMA fit did not converge in {max_iter} iterations",
                      NonConvergenceWarning, stacklevel=2)
    model = _delay_to_z(c, a) * float(np.sqrt(V))
    log.debug("ARMA(%d,%d): a=%s c=%s var=%.4g iters=%d", p_order, q_order, a, c, V, it)
    return ArmaFit(model, a, c, V, converged, it)


def ts_scalar(y):
    """Extract a one-dimensional float array from a scalar series."""
    if isinstance(y, TimeSeries):
        if y.data.shape[1] != 1 and y.m != 1:
            raise DimensionMismatch("scalar series expected")
        return np.array(y.data[:, 0], dtype=float)
    y = np.asarray(y, dtype=float)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise DimensionMismatch("scalar series expected")
    return y


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def identify_innovation_model(ts, orders, P=None):
    """Estimate a minimum-phase innovation model of a low-rank series.

    Parameters
    ----------
    ts : TimeSeries
        Data with scalar ``y1`` (``m = 1``).
    orders : dict
        Keys ``h_num``, ``h_den``, ``arma_p``, ``arma_q``.
    P : array_like, optional
        Orthogonal parameter passed to the factorization.

    Returns
    -------
    FactorizationResult
        With the :class:`ArmaFit` under ``diagnostics["arma"]``.
    """
    if ts.m != 1:
        raise ValidationError("identification supports scalar y1 only")
    try:
        h_num, h_den = int(orders["h_num"]), int(orders["h_den"])
        ap, aq = int(orders["arma_p"]), int(orders["arma_q"])
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"orders need h_num, h_den, arma_p, arma_q: {exc}") from exc
    fit = estimate_arma_pem(ts.y1[:, 0], ap, aq)
    G1 = RationalMatrix([[fit.model]], "z")
    if ts.p:
        H = estimate_H_ls(ts, h_num, h_den)
    else:
        H = RationalMatrix([], "z", shape=(0, 1))
    res = factor_from_relation(H, G1, P)
    diag = dict(res.diagnostics)
    diag["arma"] = fit
    return FactorizationResult(res.W, res.W1, res.W2, res.Q1, res.H, res.G1, res.P_used,
                               res.special_case, diag)


__all__ = ["TimeSeries", "ArmaFit", "simulate_lowrank_process", "estimate_H_ls",
           "estimate_arma_pem", "identify_innovation_model"]
