"""Minimum-phase full-column-rank spectral factors of low-rank densities.

For a density ``Phi`` of normal rank ``m`` partitioned as::

    Phi = [[Phi11, Phi12],
           [Phi21, Phi22]]      (Phi11 is m x m, full rank)

any factor ``W = [W1; W2]`` with ``Phi = W W*`` satisfies ``W2 = H W1`` for
the unique ``H = Phi21 Phi11^{-1}``.  Given a square minimum-phase factor
``G1`` of ``Phi11``, a coprime factorization of ``G1^T H^T`` with an inner
denominator yields ``W1 = G1 Q1`` and ``W2``.  When ``H`` is stable the
inner factor is a constant and no equation has to be solved.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from .config import get_tolerances
from .errors import (BoundaryZeroWarning, DefectiveZeroStructure, DimensionMismatch,
                     NotProper, PoleProximity, PreconditionViolated, RankDeficientInput,
                     SingularBlock, SingularMatrix, ValidationError, VerificationFailure)
from .polynomial import RationalFunction, cluster_roots, poly_from_roots
from .rational import (RationalMatrix, boundary_points, in_closed_region, strictly_stable,
                       strictly_unstable)
from .realization import (StateSpaceRealization, chop, minimal_realization,
                          product_realization, reduce_accurately, transfer_of,
                          transmission_zeros)
from .sylvester import solve_lyapunov, solve_stein

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# data carriers
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PartitionedSpectralDensity:
    """Spectral density ``phi`` of normal rank ``m`` with its leading ``m x m`` block.

    Parameters
    ----------
    phi : RationalMatrix
        Square ``(m+p) x (m+p)`` para-Hermitian matrix.
    m : int
        Size of the full-rank leading block.
    check : bool
        Validate para-Hermitian symmetry, ranks and boundary positivity.
    """

    phi: RationalMatrix
    m: int
    check: bool = True

    def __post_init__(self):
        phi, m = self.phi, self.m
        if phi.rows != phi.cols:
            raise DimensionMismatch(f"density must be square, got {phi.shape}")
        if not 1 <= m <= phi.rows:
            raise ValidationError(f"m={m} out of range for a {phi.rows}x{phi.rows} density")
        if self.check:
            self.validate()

    @classmethod
    def from_factor(cls, W, m=None, check=True):
        """``Phi = W W*`` for a tall factor ``W``; ``m`` defaults to ``W.cols``."""
        return cls(W @ W.para_conjugate(), W.cols if m is None else m, check)

    @property
    def variable(self):
        return self.phi.variable

    @property
    def p(self):
        return self.phi.rows - self.m

    @property
    def phi11(self):
        return self.phi[: self.m, : self.m]

    @property
    def phi12(self):
        return self.phi[: self.m, self.m:]

    @property
    def phi21(self):
        return self.phi[self.m:, : self.m]

    @property
    def phi22(self):
        return self.phi[self.m:, self.m:]

    def validate(self):
        phi = self.phi
        if not phi.allclose(phi.para_conjugate(), rtol=1e-7):
            raise ValidationError("density is not para-Hermitian")
        if self.phi11.normal_rank < self.m:
            raise SingularBlock(f"leading {self.m}x{self.m} block is rank deficient")
        if phi.normal_rank != self.m:
            raise RankDeficientInput(
                f"density has normal rank {phi.normal_rank}, expected m={self.m}")
        vals = []
        for pt in boundary_points(phi.variable, 64):
            try:
                F = phi.evaluate(pt)
            except PoleProximity:
                continue
            vals.append(np.linalg.eigvalsh(0.5 * (F + F.conj().T)).min()
                        / (1.0 + np.abs(F).max()))
        if vals and min(vals) < -1e-8:
            raise ValidationError("density is not positive semidefinite on the boundary")


@dataclass(frozen=True, eq=False)
class CoprimeFactors:
    """``T = T_D^{-1} T_N`` with ``T_D`` inner of degree ``n_u``."""

    T_N: StateSpaceRealization
    T_D: StateSpaceRealization
    X: np.ndarray
    M: np.ndarray
    sylvester_residual: float


@dataclass(frozen=True, eq=False)
class FactorizationResult:
    """A minimum-phase factor ``W = [W1; W2]`` and its ingredients."""

    W: RationalMatrix
    W1: RationalMatrix
    W2: RationalMatrix
    Q1: RationalMatrix
    H: RationalMatrix
    G1: RationalMatrix
    P_used: np.ndarray
    special_case: bool
    diagnostics: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# H
# ---------------------------------------------------------------------------

def compute_H(density):
    """Deterministic relation ``H = Phi21 Phi11^{-1}``.

    Computed on a realization of the first ``m`` columns of ``Phi``, where
    ``Phi21 Phi11^{-1}`` needs no extra states, followed by a minimal
    reduction.  Symbolic inversion is the fallback for improper densities.
    """
    m = density.m
    if density.p == 0:
        return RationalMatrix([], density.variable, shape=(0, m))
    if density.phi11.normal_rank < m:
        raise SingularBlock("Phi11 is rank deficient")
    try:
        return _relation_state_space(density.phi[:, :m], m)
    except (NotProper, SingularMatrix):
        log.debug("state-space relation unavailable; inverting Phi11 symbolically")
    try:
        inv = density.phi11.inverse()
    except SingularMatrix as exc:
        raise SingularBlock(str(exc)) from None
    return density.phi21 @ inv


_SHIFT_CANDIDATES = (0.3719, -0.6131, 1.7353, -2.2917, 0.0917, 3.1416)


def _relation_state_space(cols, m):
    R = minimal_realization(cols)
    var = R.variable
    A, B, C, D = R.A, R.B, R.C, R.D
    shift = None
    if np.linalg.cond(D[:m]) > 1e8:
        # move the feedthrough point: x = x0 + 1/y
        n = R.n
        eig = np.linalg.eigvals(A) if n else np.zeros(0)
        for x0 in _SHIFT_CANDIDATES:
            if n and np.min(np.abs(eig - x0)) < 1e-3 * (1 + abs(x0)):
                continue
            F = np.linalg.inv(x0 * np.eye(n) - A) if n else np.zeros((0, 0))
            Dt = D + C @ F @ B
            if np.linalg.cond(Dt[:m]) < 1e8:
                A, C, D, shift = -F, -C @ F @ F, Dt, x0
                break
        else:
            raise SingularMatrix("Phi11 is singular at every trial point")
    C1, C2, D1, D2 = C[:m], C[m:], D[:m], D[m:]
    D1inv = np.linalg.inv(D1)
    Ah = A - B @ D1inv @ C1
    Bh = B @ D1inv
    Ch = C2 - D2 @ D1inv @ C1
    Dh = D2 @ D1inv
    Rh = reduce_accurately(StateSpaceRealization(Ah, Bh, Ch, Dh, var, 0))
    H = transfer_of(Rh)
    if shift is not None:
        # back-substitute y = 1 / (x - x0)
        H = H.substitute_moebius(0.0, 1.0, 1.0, -shift, var)
    return H


# ---------------------------------------------------------------------------
# square minimum-phase factors
# ---------------------------------------------------------------------------

def _bilinear_to_s(M):
    """``z = (1 + s) / (1 - s)``: unit disk to the left half plane."""
    return M.substitute_moebius(1.0, 1.0, -1.0, 1.0, "s")


def _bilinear_to_z(M):
    """``s = (z - 1) / (z + 1)``."""
    return M.substitute_moebius(1.0, -1.0, 1.0, 1.0, "z")


def _complex_transfer(A, B, C, D, variable):
    """Real rational matrix of a complex realization whose transfer matrix is real."""
    p, m = D.shape
    chi = np.poly(A)[::-1]
    grid = []
    for i in range(p):
        row = []
        for j in range(m):
            chi2 = np.poly(A - np.outer(B[:, j], C[i]))[::-1]
            num = chop(chi2 - chi + D[i, j] * chi, np.abs(chi2) + np.abs(chi))
            num[-1] = D[i, j]
            row.append(RationalFunction(np.real(num), np.real(chi), variable))
        grid.append(row)
    return RationalMatrix(grid, variable, shape=(p, m))


def _unstable_zero_data(W):
    """Unstable zeros of ``W`` and their input directions ``(Lam, Z)``."""
    var = W.variable
    zeros = transmission_zeros(minimal_realization(W))
    bnd = in_closed_region(zeros, var) & ~strictly_stable(zeros, var)
    if var == "s":
        bnd &= np.abs(zeros) < 1e6
    if np.any(bnd):
        warnings.warn(f"zeros on the stability boundary are left in place: {zeros[bnd]}",
                      BoundaryZeroWarning, stacklevel=3)
    unstable = zeros[strictly_unstable(zeros, var)]
    lam, dirs = [], []
    for cl in cluster_roots(unstable, 1e-5):
        alpha = cl.center
        if alpha.imag < 0:
            continue
        k = cl.multiplicity
        Wa = W.evaluate(alpha)
        _, s, vh = np.linalg.svd(Wa)
        s = np.concatenate([s, np.zeros(W.cols - len(s))])
        null = int(np.sum(s <= 1e-6 * max(s[0], 1.0)))
        if null < k:
            raise DefectiveZeroStructure(
                f"zero {alpha:.6g} has multiplicity {k} but {null} independent directions")
        V = vh[W.cols - k:].conj().T
        for c in ([alpha] if alpha.imag == 0 else [alpha, np.conj(alpha)]):
            for j in range(k):
                lam.append(c)
                dirs.append(V[:, j] if c == alpha else V[:, j].conj())
    if not lam:
        return None, None
    return np.array(lam), np.array(dirs).T


def _outer_inner_continuous(W):
    lam, Z = _unstable_zero_data(W)
    m = W.cols
    if lam is None:
        return W, RationalMatrix.identity(m, "s")
    Lam = np.diag(lam)
    k = len(lam)
    # Lam^H Y + Y Lam + Z^H Z = 0
    I = np.eye(k)
    K = np.kron(I, Lam.conj().T) + np.kron(Lam.T, I)
    rhs = -(Z.conj().T @ Z)
    Y = np.linalg.solve(K, rhs.reshape(-1, order="F")).reshape((k, k), order="F")
    Kin = -np.linalg.solve(Y, Z.conj().T)
    Qinv = _complex_transfer(Lam, Kin, Z, np.eye(m), "s")
    Q = _complex_transfer(Lam - Kin @ Z, Kin, -Z, np.eye(m), "s")
    return W @ Qinv, Q


def _scalar_outer_inner(w):
    """Scalar Blaschke flip of every unstable zero of ``w``."""
    var = w.variable
    zs = w.zeros()
    bnd = in_closed_region(zs, var) & ~strictly_stable(zs, var)
    if np.any(bnd):
        warnings.warn(f"zeros on the stability boundary are left in place: {zs[bnd]}",
                      BoundaryZeroWarning, stacklevel=3)
    bad = zs[strictly_unstable(zs, var)]
    if var == "s":
        # b(s) = prod (s - a) / (s + conj a)
        q = RationalFunction(poly_from_roots(bad), poly_from_roots(-np.conj(bad)), "s")
    else:
        # b(z) = prod (z - a) / (1 - conj(a) z), normalized so that b(1) = 1
        q = RationalFunction(poly_from_roots(bad), poly_from_roots(1.0 / np.conj(bad)), "z")
        q = q * (1.0 / q(1.0).real)
    # no zero at infinity may remain in a discrete outer factor
    if var == "z" and w.num.degree < w.den.degree:
        d = int(w.den.degree - w.num.degree)
        q = q * RationalFunction.shift(-d, "z")
    return w / q, q


def outer_inner(W):
    """Outer-inner factorization ``W = G Q`` of a stable full-column-rank factor.

    Parameters
    ----------
    W : RationalMatrix
        Stable ``(m+p) x m`` (or square) matrix of full normal column rank.

    Returns
    -------
    G : RationalMatrix
        Minimum-phase factor with the unstable zeros of ``W`` reflected.
    Q : RationalMatrix
        Square inner factor; ``Q(1) = I`` (discrete) or ``Q(inf) = I``.

    Raises
    ------
    DefectiveZeroStructure
        When a repeated unstable zero lacks independent input directions
        (matrix case only).
    """
    m = W.cols
    if W.normal_rank < m:
        raise RankDeficientInput("outer-inner factorization needs full normal column rank")
    if not W.is_stable():
        raise PreconditionViolated("outer-inner factorization needs a stable input")
    if W.rows == 1 and m == 1:
        g, q = _scalar_outer_inner(W[0, 0])
        return RationalMatrix.scalar(g), RationalMatrix.scalar(q)
    if W.variable == "s":
        return _outer_inner_continuous(W)
    G_s, Q_s = _outer_inner_continuous(_bilinear_to_s(W))
    G, Q = _bilinear_to_z(G_s), _bilinear_to_z(Q_s)
    U = np.real(Q.evaluate(1.0))
    return G @ RationalMatrix.constant(U, "z"), RationalMatrix.constant(U.T, "z") @ Q


def scalar_spectral_factor(phi11):
    """Minimum-phase ``g`` with ``g g* = phi11`` by root selection (scalar density).

    Roots come in pairs ``r, 1/conj(r)`` (discrete) or ``r, -conj(r)``
    (continuous); the member inside the stability region is kept and half
    of any boundary roots.  The gain is positive and matched on the boundary.
    """
    if isinstance(phi11, RationalMatrix):
        if phi11.shape != (1, 1):
            raise ValidationError("root selection needs a scalar density")
        phi11 = phi11[0, 0]
    var = phi11.variable
    if phi11.is_zero:
        raise SingularBlock("scalar density is identically zero")

    def select(roots, allow_boundary):
        inside = roots[strictly_stable(roots, var)]
        bnd = roots[in_closed_region(roots, var) & ~strictly_stable(roots, var)]
        if var == "s":
            bnd = bnd[np.abs(bnd) < 1e8]
        if bnd.size and not allow_boundary:
            from .errors import BoundaryPole
            raise BoundaryPole(f"density has poles on the stability boundary: {bnd}")
        half = []
        for cl in cluster_roots(bnd, 1e-5):
            if cl.multiplicity % 2:
                raise ValidationError("boundary root of odd multiplicity; not a density")
            half.extend([cl.center] * (cl.multiplicity // 2))
        return np.concatenate([inside, np.array(half, dtype=complex)])

    zs = select(phi11.zeros(), True)
    ps = select(phi11.poles(), False)
    num = poly_from_roots(zs)
    den = poly_from_roots(ps)
    if var == "z":
        d = len(den) - len(num)
        if d > 0:
            num = np.concatenate([np.zeros(d), num])
        elif d < 0:
            den = np.concatenate([np.zeros(-d), den])
    g0 = RationalFunction(num, den, var)
    pts = boundary_points(var, 16)
    ratios = []
    for pt in pts:
        try:
            ratios.append(np.real(phi11(pt)) / abs(g0(pt)) ** 2)
        except PoleProximity:
            continue
    c = float(np.sqrt(np.median(ratios)))
    return g0 * c


def square_minimum_phase_factor(X, mode="outer_inner"):
    """Square minimum-phase factor ``G1``.

    Parameters
    ----------
    X : RationalMatrix
        A stable square factor ``W_o1`` (``mode="outer_inner"``) or a scalar
        density ``Phi11`` (``mode="root_selection"``).

    Returns
    -------
    (G1, Q)
        ``Q`` is the inner factor with ``W_o1 = G1 Q``; ``None`` in root
        selection mode.
    """
    if mode == "outer_inner":
        if X.rows != X.cols:
            raise DimensionMismatch("outer-inner mode expects a square factor")
        return outer_inner(X)
    if mode == "root_selection":
        return RationalMatrix.scalar(scalar_spectral_factor(X)), None
    raise ValidationError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# coprime factorization with inner denominator
# ---------------------------------------------------------------------------

def _check_unitary(P, m):
    P = np.eye(m) if P is None else np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (m, m):
        raise DimensionMismatch(f"P must be {m}x{m}, got {P.shape}")
    if not np.allclose(P @ P.T, np.eye(m), atol=1e-10):
        raise ValidationError("P is not orthogonal")
    return P


def coprime_inner_factorization(R, P=None):
    """Left-coprime factorization ``T = T_D^{-1} T_N`` with inner ``T_D``.

    Parameters
    ----------
    R : StateSpaceRealization
        Minimal realization of ``T`` (``p x m``) with its unstable block first.
    P : (p, p) array_like, optional
        Orthogonal matrix, default identity.

    Returns
    -------
    CoprimeFactors
        Both factors as ordinary realizations.  In discrete time the
        ``(1 - z) M`` terms are folded into the state matrices.
    """
    p = R.outputs
    P = _check_unitary(P, p)
    n_u = R.n_u
    if n_u == 0:
        TN = StateSpaceRealization(R.A, R.B, P @ R.C, P @ R.D, R.variable, 0)
        TD = StateSpaceRealization(np.zeros((0, 0)), np.zeros((0, p)), np.zeros((p, 0)), P,
                                   R.variable, 0)
        return CoprimeFactors(TN, TD, np.zeros((0, 0)), np.zeros((0, p)), 0.0)
    A_u, A_us, A_s = R.A_u, R.A_us, R.A_s
    B_u, B_s, C_u, C_s, D = R.B_u, R.B_s, R.C_u, R.C_s, R.D
    n = R.n
    if R.variable == "s":
        sol = solve_lyapunov(A_u, C_u)
        _require_invertible(sol)
        X = sol.X
        M = -np.linalg.solve(X, C_u.T)
        A_N = np.block([[A_u + M @ C_u, A_us + M @ C_s],
                        [np.zeros((n - n_u, n_u)), A_s]])
        B_N = np.vstack([B_u + M @ D, B_s])
        TN = StateSpaceRealization(A_N, B_N, P @ R.C, P @ D, "s", 0)
        TD = StateSpaceRealization(A_u + M @ C_u, M, P @ C_u, P, "s", 0)
        return CoprimeFactors(TN, TD, X, M, sol.residual_norm)

    sol = solve_stein(A_u, C_u)
    _require_invertible(sol)
    X = sol.X
    Iu = np.eye(n_u)
    # M = -X^{-1} (I - A_u)^{-T} C_u^T
    M = -np.linalg.solve(X, np.linalg.solve((Iu - A_u).T, C_u.T))
    # z E - F with E, F block upper triangular
    E = np.block([[Iu + M @ C_u, M @ C_s], [np.zeros((n - n_u, n_u)), np.eye(n - n_u)]])
    F = np.block([[A_u + M @ C_u, A_us + M @ C_s], [np.zeros((n - n_u, n_u)), A_s]])
    if np.linalg.cond(E) > 1e12:
        raise SingularMatrix("I + M C_u is singular")
    Ah = np.linalg.solve(E, F)
    Ah[n_u:, :n_u] = 0.0
    B0 = np.vstack([B_u + M @ D, B_s])
    B1 = np.vstack([M @ D, np.zeros((n - n_u, D.shape[1]))])
    Bh0 = np.linalg.solve(E, B0)
    Bh1 = np.linalg.solve(E, B1)
    TN = StateSpaceRealization(Ah, Bh0 - Ah @ Bh1, P @ R.C, P @ D - P @ R.C @ Bh1, "z", 0)
    Eu = Iu + M @ C_u
    Au_h = np.linalg.solve(Eu, A_u + M @ C_u)
    Bu_h = np.linalg.solve(Eu, M)
    TD = StateSpaceRealization(Au_h, Bu_h, P @ C_u @ (Iu - Au_h), P @ (np.eye(p) - C_u @ Bu_h),
                               "z", 0)
    return CoprimeFactors(TN, TD, X, M, sol.residual_norm)


def _require_invertible(sol):
    if not sol.invertible:
        raise SingularMatrix("Sylvester solution is not invertible (unobservable unstable mode)")


# ---------------------------------------------------------------------------
# assembling factors
# ---------------------------------------------------------------------------

def special_case_factor(G1, H, P=None):
    """``W = [G1; H G1] P^T`` for stable ``H``."""
    if H.rows and not H.is_stable():
        raise PreconditionViolated("H is not stable")
    m = G1.cols
    P = _check_unitary(P, m)
    Q1 = RationalMatrix.constant(P.T, G1.variable)
    W1 = G1 @ Q1
    W2 = H @ W1 if H.rows else RationalMatrix([], G1.variable, shape=(0, m))
    W = RationalMatrix.vstack([W1, W2]) if H.rows else W1
    return FactorizationResult(W, W1, W2, Q1, H, G1, P, True, {"n_u": 0})


def factor_from_relation(H, G1, P=None, realization=None, verify=True):
    """Minimum-phase factor from ``H`` and a square minimum-phase ``G1``.

    Parameters
    ----------
    H : RationalMatrix
        ``p x m`` deterministic relation.
    G1 : RationalMatrix
        ``m x m`` minimum-phase factor of ``Phi11``.
    P : (m, m) array_like, optional
        Orthogonal parameter of the solution set (default identity).
    realization : StateSpaceRealization, optional
        Minimal realization of ``(H G1)^T`` with its split (default: built
        from realizations of ``G1^T`` and ``H^T``).
    verify : bool
        Check inner-ness of ``Q1`` and ``W2 = H W1``.

    Returns
    -------
    FactorizationResult
    """
    var = G1.variable
    m = G1.cols
    if G1.rows != m:
        raise DimensionMismatch("G1 must be square")
    if H.cols != m:
        raise DimensionMismatch(f"H has {H.cols} columns, expected {m}")
    if H.variable != var:
        from .errors import VariableMismatch
        raise VariableMismatch("H and G1 use different variables")
    P = _check_unitary(P, m)
    if H.rows == 0 or H.is_stable():
        res = special_case_factor(G1, H, P)
        diag = dict(res.diagnostics)
        if verify:
            diag.update(_diagnose(res.W, res.Q1, H))
        return FactorizationResult(res.W, res.W1, res.W2, res.Q1, H, G1, P, True, diag)

    R = realization if realization is not None else product_realization(G1.T, H.T)
    log.debug("realization of G1^T H^T: n=%d n_u=%d", R.n, R.n_u)
    cf = coprime_inner_factorization(R, P)
    W2 = transfer_of(cf.T_N).T
    Q1 = transfer_of(cf.T_D).T
    W1 = G1 @ Q1
    W = RationalMatrix.vstack([W1, W2])
    diag = {"n_u": R.n_u, "X": cf.X, "M": cf.M, "sylvester_residual": cf.sylvester_residual,
            "realization": R}
    if verify:
        diag.update(_diagnose(W, Q1, H))
        if diag["inner_residual"] > get_tolerances().inner * 10:
            raise VerificationFailure(f"Q1 is not inner: deviation {diag['inner_residual']:.3g}")
        if diag["relation_residual"] > 1e-6:
            raise VerificationFailure(
                f"W2 = H W1 violated: deviation {diag['relation_residual']:.3g}")
    return FactorizationResult(W, W1, W2, Q1, H, G1, P, False, diag)


def _diagnose(W, Q1, H):
    var = W.variable
    out = {"inner_residual": inner_residual(Q1, 256)}
    m = W.cols
    if H.rows:
        W1, W2 = W[:m, :], W[m:, :]
        pts = RationalMatrix.vstack([W, H]).safe_points(8)
        dev = 0.0
        for pt in pts:
            a = W2.evaluate(pt)
            b = H.evaluate(pt) @ W1.evaluate(pt)
            dev = max(dev, float(np.abs(a - b).max() / (1 + np.abs(b).max())))
        out["relation_residual"] = dev
    out["poles"] = W.poles()
    try:
        out["zeros"] = W.zeros()
    except RankDeficientInput:
        out["zeros"] = np.zeros(0, complex)
    out["minimum_phase"] = bool(np.all(strictly_stable(out["poles"], var))
                                and np.all(in_closed_region(out["zeros"], var)))
    return out


def inner_residual(Q, n=256):
    """Max deviation of ``Q Q^H`` from ``I`` on the boundary grid."""
    dev = 0.0
    for pt in boundary_points(Q.variable, n):
        try:
            F = Q.evaluate(pt)
        except PoleProximity:
            continue
        dev = max(dev, float(np.abs(F @ F.conj().T - np.eye(Q.rows)).max()))
    return dev


def grid_residual(phi, W, n=256):
    """``max |Phi - W W^H|`` over the boundary grid, relative to ``1 + max |Phi|``."""
    worst, scale = 0.0, 0.0
    for pt in boundary_points(phi.variable, n):
        try:
            F = phi.evaluate(pt)
            Wp = W.evaluate(pt)
        except PoleProximity:
            continue
        worst = max(worst, float(np.abs(F - Wp @ Wp.conj().T).max()))
        scale = max(scale, float(np.abs(F).max()))
    return worst / (1.0 + scale)


def spectral_factor(density, G1=None, P=None, W_o=None, grid=256, verify=True):
    """Minimum-phase full-column-rank factor of a low-rank density.

    Parameters
    ----------
    density : PartitionedSpectralDensity
    G1 : RationalMatrix, optional
        Square minimum-phase factor of ``Phi11``.  Without it, ``G1`` is
        derived from ``W_o`` (outer-inner of its leading block) or, for
        ``m = 1``, by root selection on ``Phi11``.
    P : (m, m) array_like, optional
        Orthogonal parameter, default identity.
    W_o : RationalMatrix, optional
        Any stable factor of the density.
    grid : int
        Boundary points for the residual check.

    Returns
    -------
    FactorizationResult

    Raises
    ------
    VerificationFailure
        If the factorization residual exceeds the configured tolerance.
    """
    m = density.m
    if G1 is None:
        if W_o is not None:
            G1, _ = outer_inner(W_o[:m, :])
        elif m == 1:
            G1 = RationalMatrix.scalar(scalar_spectral_factor(density.phi11))
        else:
            raise ValidationError("G1 or a stable factor W_o is required when m > 1")
    H = compute_H(density)
    res = factor_from_relation(H, G1, P, verify=verify)
    if verify:
        r = grid_residual(density.phi, res.W, grid)
        res.diagnostics["grid_residual"] = r
        if r > get_tolerances().residual:
            raise VerificationFailure(f"factorization residual {r:.3g} exceeds tolerance")
    return res


def spectral_factor_from_stable_factor(W_o, m, P=None, grid=256, verify=True):
    """Factor from a stable (not necessarily minimum-phase) factor ``W_o``.

    Uses ``H G1 = W_o2 Q*`` where ``W_o1 = G1 Q`` is an outer-inner
    factorization, so ``Phi11`` is never inverted.
    """
    W_o1, W_o2 = W_o[:m, :], W_o[m:, :]
    G1, Q = outer_inner(W_o1)
    if W_o2.rows == 0:
        H = RationalMatrix([], W_o.variable, shape=(0, m))
        R = None
    else:
        Qc = Q.para_conjugate()
        H = W_o2 @ Qc @ G1.inverse()
        R = product_realization(Qc.T, W_o2.T)
    res = factor_from_relation(H, G1, P, realization=R, verify=verify)
    if verify:
        phi = W_o @ W_o.para_conjugate()
        r = grid_residual(phi, res.W, grid)
        res.diagnostics["grid_residual"] = r
        if r > get_tolerances().residual:
            raise VerificationFailure(f"factorization residual {r:.3g} exceeds tolerance")
    return res


# ---------------------------------------------------------------------------
# uniqueness up to a unitary factor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EquivalenceReport:
    equivalent: bool
    U: np.ndarray | None
    message: str = ""

    def __bool__(self):
        return self.equivalent


def unitary_equivalence_check(Wa, Wb, tol=1e-7, npoints=8):
    """Is ``Wb = Wa U`` for a constant unitary ``U``?"""
    if Wa.shape != Wb.shape or Wa.variable != Wb.variable:
        return EquivalenceReport(False, None, "shape or variable mismatch")
    pts = RationalMatrix.hstack([Wa, Wb]).safe_points(npoints)
    Us = []
    for pt in pts:
        A = Wa.evaluate(pt)
        B = Wb.evaluate(pt)
        Us.append(np.linalg.pinv(A) @ B)
    U = Us[0]
    spread = max(float(np.abs(u - U).max()) for u in Us)
    if spread > tol * (1 + np.abs(U).max()):
        return EquivalenceReport(False, U, f"U varies across points by {spread:.3g}")
    dev = float(np.abs(U @ U.conj().T - np.eye(U.shape[0])).max())
    if dev > tol:
        return EquivalenceReport(False, U, f"U deviates from unitary by {dev:.3g}")
    for pt in pts:
        A = Wa.evaluate(pt)
        B = Wb.evaluate(pt)
        err = float(np.abs(A @ U - B).max() / (1 + np.abs(B).max()))
        if err > tol:
            return EquivalenceReport(False, U, f"Wa U differs from Wb by {err:.3g}")
    if np.abs(U.imag).max() <= tol:
        U = U.real
    return EquivalenceReport(True, U, "")


__all__ = ["PartitionedSpectralDensity", "CoprimeFactors", "FactorizationResult", "compute_H",
           "outer_inner", "scalar_spectral_factor", "square_minimum_phase_factor",
           "coprime_inner_factorization", "special_case_factor", "factor_from_relation",
           "spectral_factor", "spectral_factor_from_stable_factor", "inner_residual",
           "grid_residual", "unitary_equivalence_check", "EquivalenceReport"]
