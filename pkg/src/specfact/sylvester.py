"""Stein and Lyapunov equations for the unstable block of a realization.

Both are instances of the Sylvester-type equation ``A X B^T + C X D^T = E``,
which has a unique solution exactly when the pencils ``A - lam C`` and
``D - lam B`` are regular and no eigenvalue of the first is the negative of
an eigenvalue of the second.  Solutions are computed by vectorization, which
is adequate for the small unstable blocks met in practice.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import get_tolerances
from .errors import NonUniqueSolution, PreconditionViolated, ValidationError
from .rational import strictly_unstable


@dataclass(frozen=True)
class SylvesterSolution:
    """Symmetric solution ``X`` with residual and invertibility diagnostics."""

    X: np.ndarray
    residual_norm: float
    invertible: bool
    min_singular_value: float


@dataclass(frozen=True)
class UniquenessReport:
    """Outcome of :func:`uniqueness_check`.

    ``witness`` is ``None`` when the solution is unique, otherwise a short
    description together with the offending eigenvalue pair (if any).
    """

    unique: bool
    witness: tuple | None = None

    def __bool__(self):
        return self.unique


def _homogeneous_eigs(A, B):
    """Generalized eigenvalues of ``A - lam B`` as normalized pairs ``(alpha, beta)``."""
    w = sla.eigvals(A, B, homogeneous_eigvals=True)
    alpha, beta = w[0], w[1]
    norm = np.hypot(np.abs(alpha), np.abs(beta))
    return alpha, beta, norm


def uniqueness_check(A, B, C, D, tol=None):
    """Unique solvability of ``A X B^T + C X D^T = E``.

    Parameters
    ----------
    A, C : (n, n) array_like
        First pencil ``A - lam C``.
    D, B : (k, k) array_like
        Second pencil ``D - lam B``.
    tol : float, optional
        Relative threshold for regularity and spectral coincidence.

    Returns
    -------
    UniquenessReport
    """
    tol = get_tolerances().sylvester if tol is None else tol
    A, B, C, D = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D))
    a1, b1, n1 = _homogeneous_eigs(A, C)
    a2, b2, n2 = _homogeneous_eigs(D, B)
    scale1 = max(np.abs(A).max(initial=0), np.abs(C).max(initial=0), 1.0)
    scale2 = max(np.abs(D).max(initial=0), np.abs(B).max(initial=0), 1.0)
    if np.any(n1 <= tol * scale1):
        return UniquenessReport(False, ("pencil A - lam C is singular", None))
    if np.any(n2 <= tol * scale2):
        return UniquenessReport(False, ("pencil D - lam B is singular", None))
    a1, b1 = a1 / n1, b1 / n1
    a2, b2 = a2 / n2, b2 / n2
    # lam + mu = 0 with lam = a1/b1, mu = a2/b2  <=>  a1 b2 + a2 b1 = 0
    gap = np.abs(a1[:, None] * b2[None, :] + a2[None, :] * b1[:, None])
    i, j = np.unravel_index(np.argmin(gap), gap.shape)
    if gap[i, j] <= tol:
        lam = a1[i] / b1[i] if b1[i] != 0 else np.inf
        mu = a2[j] / b2[j] if b2[j] != 0 else np.inf
        return UniquenessReport(False, ("spectra are not disjoint", (lam, mu)))
    return UniquenessReport(True, None)


def stein_uniqueness(A_u, tol=None):
    """Uniqueness for ``X - A^T X A = E``: no eigenvalue product equals one."""
    A_u = np.atleast_2d(np.asarray(A_u, dtype=float))
    n = A_u.shape[0]
    return uniqueness_check(np.eye(n), np.eye(n), -A_u.T, A_u.T, tol)


def lyapunov_uniqueness(A_u, tol=None):
    """Uniqueness for ``A^T X + X A = E``: no eigenvalue sum equals zero."""
    A_u = np.atleast_2d(np.asarray(A_u, dtype=float))
    n = A_u.shape[0]
    return uniqueness_check(A_u.T, np.eye(n), np.eye(n), A_u.T, tol)


def solve_sylvester_type(A, B, C, D, E):
    """Solve ``A X B^T + C X D^T = E`` by vectorization (no uniqueness check)."""
    A, B, C, D, E = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (A, B, C, D, E))
    n, k = E.shape
    K = np.kron(B, A) + np.kron(D, C)
    x = np.linalg.solve(K, E.reshape(-1, order="F"))
    return x.reshape((n, k), order="F")


def _finish(X, residual):
    X = 0.5 * (X + X.T)
    s = np.linalg.svd(X, compute_uv=False)
    smin = float(s[-1]) if s.size else 0.0
    invertible = bool(s.size == 0 or smin > get_tolerances().rank * s[0])
    return SylvesterSolution(X, float(np.abs(residual(X)).max(initial=0.0)), invertible,
                             smin)


def _prepare(A_u, C_u):
    A_u = np.atleast_2d(np.asarray(A_u, dtype=float))
    C_u = np.asarray(C_u, dtype=float)
    if C_u.ndim < 2:
        C_u = C_u.reshape(-1, A_u.shape[0])
    if A_u.shape[0] != A_u.shape[1] or C_u.shape[1] != A_u.shape[0]:
        raise ValidationError(f"incompatible shapes A_u {A_u.shape}, C_u {C_u.shape}")
    return A_u, C_u


def solve_stein(A_u, C_u):
    """Solve ``X - A_u^T X A_u - C_u^T C_u = 0``.

    Parameters
    ----------
    A_u : (n, n) array_like
        All eigenvalues strictly outside the closed unit disk.
    C_u : (p, n) array_like

    Returns
    -------
    SylvesterSolution

    Raises
    ------
    PreconditionViolated
        If an eigenvalue of ``A_u`` lies in the closed unit disk.
    NonUniqueSolution
        If two eigenvalues have product one.
    """
    A_u, C_u = _prepare(A_u, C_u)
    n = A_u.shape[0]
    if n == 0:
        return SylvesterSolution(np.zeros((0, 0)), 0.0, True, 0.0)
    eig = np.linalg.eigvals(A_u)
    if not np.all(strictly_unstable(eig, "z")):
        raise PreconditionViolated("A_u has eigenvalues in the closed unit disk")
    rep = stein_uniqueness(A_u)
    if not rep:
        raise NonUniqueSolution(f"Stein equation is not uniquely solvable: {rep.witness}")
    Q = C_u.T @ C_u
    K = np.eye(n * n) - np.kron(A_u.T, A_u.T)
    X = np.linalg.solve(K, Q.reshape(-1, order="F")).reshape((n, n), order="F")
    return _finish(X, lambda X: X - A_u.T @ X @ A_u - Q)


def solve_lyapunov(A_u, C_u):
    """Solve ``A_u^T X + X A_u - C_u^T C_u = 0``.

    Parameters
    ----------
    A_u : (n, n) array_like
        All eigenvalues strictly in the open right half plane.
    C_u : (p, n) array_like

    Returns
    -------
    SylvesterSolution

    Raises
    ------
    PreconditionViolated
        If an eigenvalue of ``A_u`` lies in the closed left half plane.
    NonUniqueSolution
        If two eigenvalues sum to zero.
    """
    A_u, C_u = _prepare(A_u, C_u)
    n = A_u.shape[0]
    if n == 0:
        return SylvesterSolution(np.zeros((0, 0)), 0.0, True, 0.0)
    eig = np.linalg.eigvals(A_u)
    if not np.all(strictly_unstable(eig, "s")):
        raise PreconditionViolated("A_u has eigenvalues in the closed left half plane")
    rep = lyapunov_uniqueness(A_u)
    if not rep:
        raise NonUniqueSolution(f"Lyapunov equation is not uniquely solvable: {rep.witness}")
    Q = C_u.T @ C_u
    I = np.eye(n)
    K = np.kron(I, A_u.T) + np.kron(A_u.T, I)
    X = np.linalg.solve(K, Q.reshape(-1, order="F")).reshape((n, n), order="F")
    return _finish(X, lambda X: A_u.T @ X + X @ A_u - Q)


__all__ = ["SylvesterSolution", "UniquenessReport", "uniqueness_check", "stein_uniqueness",
           "lyapunov_uniqueness", "solve_sylvester_type", "solve_stein", "solve_lyapunov"]
