"""Minimal state-space realizations with an unstable/stable block split.

A realization ``(A, B, C, D)`` stores the unstable modes first::

    A = [[A_u, A_us],
         [0,   A_s ]]

with ``A_u`` holding the poles outside the closed stability region and
``A_s`` the rest.  :func:`minimal_realization` builds one block per pole
cluster from a partial-fraction expansion, so ``A_us`` is zero for
realizations produced here; :func:`similarity` may fill it in.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .config import get_tolerances
from .errors import DocumentError, NotProper, PoleProximity, SingularTransform, ValidationError
from .polynomial import (Polynomial, RationalFunction, cluster_roots, merge_near_multiple,
                         series_divide, taylor_shift)
from .rational import RationalMatrix, strictly_unstable


@dataclass(frozen=True, eq=False)
class StateSpaceRealization:
    """Quadruple ``(A, B, C, D)`` with ``n_u`` leading unstable states.

    Parameters
    ----------
    A : (n, n) array_like
    B : (n, m) array_like
    C : (p, n) array_like
    D : (p, m) array_like
    variable : {"z", "s"}
    n_u : int
        Size of the leading unstable block.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    variable: str = "z"
    n_u: int = 0

    def __post_init__(self):
        D = np.atleast_2d(np.array(self.D, dtype=float))
        p, m = D.shape
        A = np.atleast_2d(np.array(self.A, dtype=float)) if np.size(self.A) \
            else np.zeros((0, 0))
        n = A.shape[0]
        B = np.array(self.B, dtype=float).reshape(n, m)
        C = np.array(self.C, dtype=float).reshape(p, n)
        if A.shape != (n, n):
            raise ValidationError(f"A must be square, got {A.shape}")
        if self.variable not in ("z", "s"):
            raise ValidationError(f"variable must be 'z' or 's', got {self.variable!r}")
        if not 0 <= self.n_u <= n:
            raise ValidationError(f"n_u={self.n_u} out of range for n={n}")
        for name, arr in (("A", A), ("B", B), ("C", C), ("D", D)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} has non-finite entries")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    # -- shapes and blocks ---------------------------------------------------
    @property
    def n(self):
        return self.A.shape[0]

    @property
    def inputs(self):
        return self.D.shape[1]

    @property
    def outputs(self):
        return self.D.shape[0]

    @property
    def A_u(self):
        return self.A[: self.n_u, : self.n_u]

    @property
    def A_s(self):
        return self.A[self.n_u:, self.n_u:]

    @property
    def A_us(self):
        return self.A[: self.n_u, self.n_u:]

    @property
    def B_u(self):
        return self.B[: self.n_u]

    @property
    def B_s(self):
        return self.B[self.n_u:]

    @property
    def C_u(self):
        return self.C[:, : self.n_u]

    @property
    def C_s(self):
        return self.C[:, self.n_u:]

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, point):
        """``C (point I - A)^{-1} B + D``."""
        if self.n == 0:
            return self.D.astype(complex)
        X = np.linalg.solve(point * np.eye(self.n) - self.A, self.B)
        return self.C @ X + self.D

    def transpose(self):
        """Realization of the transposed transfer matrix (same split)."""
        return StateSpaceRealization(self.A.T.copy(), self.C.T.copy(), self.B.T.copy(),
                                     self.D.T.copy(), self.variable, 0)

    def split_ok(self):
        """True when the declared split holds: zero lower-left, eigenvalues classified."""
        if self.n == 0:
            return True
        if np.any(self.A[self.n_u:, : self.n_u] != 0.0):
            return False
        eu = np.linalg.eigvals(self.A_u) if self.n_u else np.zeros(0)
        es = np.linalg.eigvals(self.A_s) if self.n_u < self.n else np.zeros(0)
        return bool(np.all(strictly_unstable(eu, self.variable))
                    and not np.any(strictly_unstable(es, self.variable)))

    def is_minimal(self, rtol=None):
        rtol = get_tolerances().rank if rtol is None else rtol
        n = self.n
        if n == 0:
            return True
        return (_rank(controllability_matrix(self.A, self.B), rtol) == n
                and _rank(controllability_matrix(self.A.T, self.C.T), rtol) == n)

    # -- serialization -------------------------------------------------------
    def to_dict(self):
        return {"A": self.A.tolist(), "B": self.B.tolist(), "C": self.C.tolist(),
                "D": self.D.tolist(), "n_u": int(self.n_u), "variable": self.variable}

    @classmethod
    def from_dict(cls, doc, path="$"):
        if not isinstance(doc, dict):
            raise DocumentError(path, "expected an object")
        for key in ("A", "B", "C", "D", "n_u", "variable"):
            if key not in doc:
                raise DocumentError(f"{path}.{key}", "missing field")
        D = np.array(doc["D"], dtype=float)
        if D.ndim != 2:
            raise DocumentError(f"{path}.D", "expected a matrix")
        p, m = D.shape
        n = len(doc["A"])
        try:
            A = np.array(doc["A"], dtype=float).reshape(n, n)
            B = np.array(doc["B"], dtype=float).reshape(n, m)
            C = np.array(doc["C"], dtype=float).reshape(p, n)
        except ValueError as exc:
            raise DocumentError(path, f"inconsistent matrix shapes ({exc})") from None
        return cls(A, B, C, D, doc["variable"], int(doc["n_u"]))


def _rank(M, rtol):
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * s[0])) if s[0] > 0 else 0


def controllability_matrix(A, B):
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks) if blocks else np.zeros((n, 0))


def _observable_part(A, B, C, shift, scale):
    """Orthogonal projection onto the observable subspace.

    The observability matrix is built from ``(A - shift I) / scale`` for
    conditioning; its kernel is the same as for ``A``.
    """
    n = A.shape[0]
    As = (A - shift * np.eye(n)) / scale
    blocks = [C]
    for _ in range(n - 1):
        blocks.append(blocks[-1] @ As)
    O = np.vstack(blocks)
    _, s, vt = np.linalg.svd(O)
    r = int(np.sum(s > get_tolerances().rank * s[0])) if s.size and s[0] > 0 else 0
    V = vt[:r].T
    return V.T @ A @ V, V.T @ B, C @ V


# ---------------------------------------------------------------------------
# minimal realization
# ---------------------------------------------------------------------------

def _strictly_proper_parts(T):
    """Return ``D`` and the entrywise ``(num, den)`` of ``T - D`` (den monic)."""
    D = T.value_at_infinity()
    parts = []
    for i in range(T.rows):
        row = []
        for j in range(T.cols):
            e = T[i, j]
            if e.is_zero or e.den.degree == 0:
                row.append(None)
                continue
            num = e.num - e.den * D[i, j]
            if num.is_zero or num.degree >= e.den.degree:
                num = _drop_top(num, e.den.degree)
            row.append((num, e.den))
        parts.append(row)
    return D, parts


def _drop_top(num, deg):
    c = np.array(num.coeffs[: int(deg)], dtype=float)
    from .polynomial import Polynomial
    return Polynomial(c)


def _block_order_key(center, variable):
    unstable = bool(strictly_unstable([center], variable)[0])
    return (0 if unstable else 1, round(abs(center), 12), round(float(np.angle(center)), 12))


def minimal_realization(T):
    """Minimal realization of a proper rational matrix with a stable split.

    Two candidates are compared on boundary and far-field points: a Gilbert
    realization from partial fractions (block diagonal over pole clusters,
    exact pole placement) and a reduced column-companion realization, which
    stays accurate when distinct poles sit close together and residues
    become large.

    Parameters
    ----------
    T : RationalMatrix
        Proper ``p x m`` rational matrix.

    Returns
    -------
    StateSpaceRealization
        Unstable modes first.

    Raises
    ------
    NotProper
        If an entry has a numerator of higher degree than its denominator.
    """
    if not T.is_proper:
        raise NotProper("transfer matrix has an improper entry")
    gil = _gilbert_realization(T)
    if gil.n == 0:
        return gil
    err_g = _realization_error(gil, T)
    if err_g <= 1e-12:
        return gil
    comp = _companion_realization(T)
    if comp.n == gil.n and comp.n_u == gil.n_u and _realization_error(comp, T) < 0.1 * err_g:
        return comp
    return gil


def _realization_error(R, T):
    pts = np.concatenate([_boundary_checks(T.variable, 12),
                          _check_points(R.A, T.variable)[:6]])
    worst = 0.0
    for x in pts:
        if not _clear_of_poles(R.A, x):
            continue
        try:
            ref = T.evaluate(x)
        except PoleProximity:
            continue
        worst = max(worst, float(np.abs(R.evaluate(x) - ref).max() / (1 + np.abs(ref).max())))
    return worst


def _companion_realization(T):
    """Block-companion realization per column, reduced to minimal."""
    p, m = T.shape
    var = T.variable
    D, parts = _strictly_proper_parts(T)
    As, Bs, Cs = [], [], []
    for j in range(m):
        dens = []
        for i in range(p):
            if parts[i][j] is None:
                continue
            d = parts[i][j][1]
            if not any(d.degree == e.degree and np.allclose(d.coeffs, e.coeffs, rtol=1e-12,
                                                            atol=0.0) for e in dens):
                dens.append(d)
        if not dens:
            As.append(np.zeros((0, 0)))
            Bs.append(np.zeros((0, 1)))
            Cs.append(np.zeros((p, 0)))
            continue
        den = dens[0]
        for e in dens[1:]:
            den = den * e
        k = int(den.degree)
        dc = den.coeffs / den.coeffs[-1]
        A = np.zeros((k, k))
        A[:-1, 1:] = np.eye(k - 1)
        A[-1, :] = -dc[:-1]
        B = np.zeros((k, 1))
        B[-1, 0] = 1.0
        C = np.zeros((p, k))
        for i in range(p):
            if parts[i][j] is None:
                continue
            num, d = parts[i][j]
            q, _ = divmod(den, d)
            c = (num * q).coeffs / den.coeffs[-1]
            C[i, : min(k, c.size)] = c[:k]
        As.append(A)
        Bs.append(B)
        Cs.append(C)
    A = sla.block_diag(*As) if any(a.size for a in As) else np.zeros((0, 0))
    B = sla.block_diag(*Bs)
    C = np.hstack(Cs)
    R = StateSpaceRealization(A, B, C, D, var, 0)
    return reduce_accurately(R)


def _gilbert_realization(T):
    tol = get_tolerances()
    p, m = T.shape
    var = T.variable
    D, parts = _strictly_proper_parts(T)

    # global pole clustering over all entry denominators
    roots, owner, own = [], [], {}
    for i in range(p):
        for j in range(m):
            if parts[i][j] is None:
                continue
            r = own[i, j] = merge_near_multiple(parts[i][j][1])
            roots.extend(r)
            owner.extend([(i, j)] * len(r))
    if not roots:
        return StateSpaceRealization(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D,
                                     var, 0)
    roots = np.asarray(roots, dtype=complex)
    clusters = _cluster_with_index(roots, tol.pole_cluster)

    blocks = []
    scale = 0.0
    for idx in clusters:
        center = roots[idx].mean()
        if abs(center.imag) <= tol.pole_cluster * (1 + abs(center)) * 10:
            center = complex(center.real, 0.0)
        elif center.imag < 0:
            continue  # realized together with its conjugate
        # entry multiplicities within the cluster
        mult = {}
        for k in idx:
            mult[owner[k]] = mult.get(owner[k], 0) + 1
        kmax = max(mult.values())
        R = np.zeros((kmax, p, m), dtype=complex)  # R[j-1] multiplies (x - center)^-j
        for (i, j), k in mult.items():
            num, den = parts[i][j]
            own_roots = own[i, j]
            # the k own roots closest to the center belong to this cluster
            order = np.argsort(np.abs(own_roots - center))
            rest = own_roots[order[k:]]
            drest = np.poly(rest)[::-1] if rest.size else np.ones(1)
            nt = taylor_shift(num.coeffs, center) if not num.is_zero else np.zeros(1)
            dt = taylor_shift(drest, center)
            c = series_divide(nt, dt, k)
            for l in range(k):
                R[k - l - 1, i, j] = c[l]
        scale = max(scale, float(np.max(np.abs(R))))
        blocks.append((center, R))

    real_blocks = []
    for center, R in blocks:
        if np.max(np.abs(R)) <= 1e-8 * max(scale, 1e-300):
            continue
        if center.imag == 0.0:
            blk = _real_pole_block(center.real, R.real)
        else:
            blk = _complex_pair_block(center, R)
        if blk[0].shape[0]:
            real_blocks.append((center, blk))

    real_blocks.sort(key=lambda cb: _block_order_key(cb[0], var))
    if not real_blocks:
        return StateSpaceRealization(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D,
                                     var, 0)
    A = sla.block_diag(*[b[0] for _, b in real_blocks])
    B = np.vstack([b[1] for _, b in real_blocks])
    C = np.hstack([b[2] for _, b in real_blocks])
    n_u = sum(b[0].shape[0] for c, b in real_blocks
              if strictly_unstable([c], var)[0])
    return StateSpaceRealization(A, B, C, D, var, n_u)


def _cluster_with_index(roots, rtol):
    """Clusters of ``roots`` as lists of indices, conjugate-consistent."""
    groups = cluster_roots(roots, rtol)
    out = []
    used = np.zeros(len(roots), dtype=bool)
    for g in groups:
        idx = []
        for r in g.members:
            cand = np.where((~used) & (roots == r))[0]
            used[cand[0]] = True
            idx.append(int(cand[0]))
        out.append(idx)
    return out


def _real_pole_block(lam, R):
    """Block realizing ``sum_j R[j-1] / (x - lam)^j`` for real ``lam``."""
    k, p, m = R.shape
    if k == 1:
        U, s, Vt = np.linalg.svd(R[0])
        r = int(np.sum(s > get_tolerances().rank * s[0])) if s[0] > 0 else 0
        A = lam * np.eye(r)
        B = Vt[:r]
        C = U[:, :r] * s[:r]
        return A, B, C
    n = k * m
    A = lam * np.eye(n) + np.kron(np.eye(k, k=1), np.eye(m))
    B = np.zeros((n, m))
    B[-m:] = np.eye(m)
    C = np.hstack([R[k - 1 - l] for l in range(k)])
    Nr, Br, Cr = _observable_part(A - lam * np.eye(n), B, C, 0.0, 1.0)
    # keep the pole exactly on the diagonal
    return Nr + lam * np.eye(Nr.shape[0]), Br, Cr


def _complex_pair_block(lam, R):
    """Real block for the pair ``lam, conj(lam)`` with residues ``R``."""
    k, p, m = R.shape
    # N(x) = 2 Re( sum_j R_j (x-lam)^(k-j) (x-conj lam)^k ), ascending coefficients
    deg = 2 * k
    N = np.zeros((deg, p, m))
    for j in range(1, k + 1):
        poly = np.poly(np.concatenate([np.full(k - j, lam), np.full(k, np.conj(lam))]))[::-1]
        for l, cl in enumerate(poly):
            N[l] += 2.0 * np.real(cl * R[j - 1])
    q = np.array([abs(lam) ** 2, -2.0 * lam.real, 1.0])
    d = np.array([1.0])
    for _ in range(k):
        d = np.convolve(d, q)
    comp = np.zeros((deg, deg))
    comp[:-1, 1:] = np.eye(deg - 1)
    comp[-1, :] = -d[:-1]
    A = np.kron(comp, np.eye(m))
    B = np.zeros((deg * m, m))
    B[-m:] = np.eye(m)
    C = np.hstack([N[l] for l in range(deg)])
    Ar, Br, Cr = _observable_part(A, B, C, lam.real, abs(lam.imag))
    if Ar.shape[0] > 2:
        Tm, Z = sla.schur(Ar, output="real")
        Ar, Br, Cr = Tm, Z.T @ Br, Cr @ Z
    return Ar, Br, Cr


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def transfer_of(R):
    """Rational matrix ``C (xI - A)^{-1} B + D`` of a realization.

    Coefficients come from two routes: eigenvalues of ``A`` and ``A - b c``
    (using ``c (xI-A)^{-1} b = (det(xI-A+bc) - det(xI-A)) / det(xI-A)``) and
    interpolation of ``det(xI-A) G(x)`` at scaled roots of unity, once past
    the spectrum and once on the unit circle.  The first is exact for well
    separated poles, the others keep clustered poles accurate.  Per entry
    the candidate with the smallest residual at check points wins.
    """
    p, m, var = R.outputs, R.inputs, R.variable
    if R.n == 0:
        return RationalMatrix.constant(R.D, var)
    chi_e = np.real(np.poly(R.A))[::-1]
    eig = np.linalg.eigvals(R.A)
    interp = [_interpolated_coefficients(R, rho) for rho in (_radius(R.A), 1.0)
              if np.min(np.abs(np.abs(eig) - rho)) > 1e-3]
    checks = _check_points(R.A, var)
    G = np.array([R.evaluate(x) for x in checks])
    grid = []
    for i in range(p):
        row = []
        for j in range(m):
            bc = np.outer(R.B[:, j], R.C[i])
            if not np.any(bc):
                num_e = R.D[i, j] * chi_e
            else:
                chi2 = np.real(np.poly(R.A - bc))[::-1]
                num_e = chop(chi2 - chi_e + R.D[i, j] * chi_e, np.abs(chi2) + np.abs(chi_e))
                num_e[-1] = R.D[i, j]  # leading terms cancel exactly
            cands = [(num_e, chi_e)] + [(num_i[i, j], chi_i) for chi_i, num_i in interp]
            best = min(cands, key=lambda nd: _fit_error(nd[0], nd[1], checks, G[:, i, j]))
            row.append(RationalFunction(best[0], best[1], var))
        grid.append(row)
    return RationalMatrix(grid, var, shape=(p, m))


def _radius(A):
    return 1.5 * max(np.abs(np.linalg.eigvals(A)).max(), 1e-3) + 0.5


def _interpolated_coefficients(R, rho):
    """Ascending coefficients of ``det(xI-A)`` and ``det(xI-A) G(x)``."""
    n = R.n
    N = n + 1
    pts = rho * np.exp(2j * np.pi * (np.arange(N) + 0.5) / N)
    chi_v = np.empty(N, complex)
    num_v = np.empty((N,) + R.D.shape, complex)
    for k, x in enumerate(pts):
        lu, piv = sla.lu_factor(x * np.eye(n) - R.A)
        sign = (-1.0) ** np.count_nonzero(piv != np.arange(n))
        chi_v[k] = sign * np.prod(np.diag(lu))
        num_v[k] = chi_v[k] * (R.C @ sla.lu_solve((lu, piv), R.B) + R.D)
    scale = rho ** np.arange(N) * np.exp(1j * np.pi * np.arange(N) / N)
    chi = np.real(np.fft.fft(chi_v) / N / scale)
    num = np.real(np.fft.fft(num_v, axis=0) / N / scale[:, None, None])
    chi[-1] = 1.0
    num[-1] = R.D
    return chi, np.moveaxis(num, 0, -1)


def _check_points(A, variable, k=6):
    rng = np.random.default_rng(11)
    rho = _radius(A)
    far = (0.3 + 0.6 * rng.random(k)) * rho * np.exp(2j * np.pi * rng.random(k))
    if variable == "z":
        near = np.exp(2j * np.pi * rng.random(k))
    else:
        near = 1j * np.concatenate([rng.standard_normal(k // 2), rho * rng.standard_normal(k // 2)])
    pts = np.concatenate([far, near])
    eig = np.linalg.eigvals(A)
    return pts[[np.min(np.abs(eig - x)) > 1e-6 * (1 + abs(x)) for x in pts]]


def _fit_error(num, den, xs, vals):
    with np.errstate(all="ignore"):
        approx = np.polyval(num[::-1], xs) / np.polyval(den[::-1], xs)
        err = np.max(np.abs(approx - vals) / (1 + np.abs(vals)))
    return float(err) if np.isfinite(err) else np.inf


def _krylov_basis(A, B, rtol):
    """Orthonormal basis of the controllable subspace by block Arnoldi."""
    n = A.shape[0]
    Q = np.zeros((n, 0))
    W = B
    ref = max(np.linalg.norm(B, 2) if B.size else 0.0, 1e-300)
    anorm = max(np.linalg.norm(A, 2) if n else 0.0, 1e-300)
    while Q.shape[1] < n and W.shape[1]:
        for _ in range(2):
            W = W - Q @ (Q.T @ W)
        U, s, _ = np.linalg.svd(W, full_matrices=False)
        r = int(np.sum(s > rtol * ref))
        r = min(r, n - Q.shape[1])
        if r == 0:
            break
        V = U[:, :r]
        Q = np.hstack([Q, V])
        W = A @ V
        ref = anorm
    return Q


def reduce_to_minimal(R, rtol=None):
    """Remove uncontrollable and unobservable states, then restore the split.

    Rank decisions use orthogonal block-Arnoldi bases with threshold ``rtol``
    relative to ``||A||`` (default: the configured rank tolerance).
    """
    rtol = get_tolerances().rank if rtol is None else rtol
    if R.n == 0:
        return R
    Qc = _krylov_basis(R.A, R.B, rtol)
    A, B, C = Qc.T @ R.A @ Qc, Qc.T @ R.B, R.C @ Qc
    if A.shape[0]:
        Qo = _krylov_basis(A.T, C.T, rtol)
        A, B, C = Qo.T @ A @ Qo, Qo.T @ B, C @ Qo
    out = StateSpaceRealization(A, B, C, R.D, R.variable, 0)
    return restore_split(out)


def reduce_accurately(R, rtols=(None, 1e-10, 1e-12), accept=1e-10):
    """:func:`reduce_to_minimal` with the loosest rank threshold that keeps ``R``.

    A loose threshold removes near pole-zero cancellations left by rounding
    but can also cut weakly coupled modes when ``A`` is badly scaled.  Each
    candidate is compared with ``R`` on boundary points; the first one within
    ``accept`` (relative) is returned, otherwise the most accurate.
    """
    if R.n == 0:
        return R
    pts = [x for x in _boundary_checks(R.variable) if _clear_of_poles(R.A, x)]
    refs = [R.evaluate(x) for x in pts]
    best, best_err = None, np.inf
    for rtol in rtols:
        C = reduce_to_minimal(R, rtol)
        if not all(_clear_of_poles(C.A, x) for x in pts):
            continue
        err = max((float(np.abs(C.evaluate(x) - ref).max() / (1 + np.abs(ref).max()))
                   for x, ref in zip(pts, refs)), default=0.0)
        if err <= accept:
            return C
        if err < best_err:
            best, best_err = C, err
    return best if best is not None else reduce_to_minimal(R)


def series(R1, R2):
    """Realization of the product ``T1 T2`` (``R2`` feeds ``R1``), not reduced."""
    if R1.variable != R2.variable:
        raise ValidationError("realizations use different variables")
    if R1.inputs != R2.outputs:
        raise ValidationError(f"cannot connect {R2.outputs} outputs to {R1.inputs} inputs")
    n1, n2 = R1.n, R2.n
    A = np.block([[R2.A, np.zeros((n2, n1))], [R1.B @ R2.C, R1.A]])
    B = np.vstack([R2.B, R1.B @ R2.D])
    C = np.hstack([R1.D @ R2.C, R1.C])
    return StateSpaceRealization(A, B, C, R1.D @ R2.D, R1.variable, 0)


def product_realization(*factors):
    """Minimal realization of the product of rational matrices, split restored.

    Two candidates are built: a reduced series connection of the factor
    realizations (no coefficient rounding on shared poles) and a realization
    of the product formed in coefficient form (no rank decisions on badly
    scaled states).  The one closer to the pointwise product on the
    boundary wins.
    """
    R = minimal_realization(factors[-1])
    for F in reversed(factors[:-1]):
        R = series(minimal_realization(F), R)
    prod = factors[0]
    for F in factors[1:]:
        prod = prod @ F
    cands = [reduce_accurately(R), minimal_realization(prod)]
    var = prod.variable
    pts = [x for x in _boundary_checks(var)
           if all(_clear_of_poles(C.A, x) for C in cands)]

    def error(C):
        worst = 0.0
        for x in pts:
            ref = np.eye(prod.cols, dtype=complex)
            for F in reversed(factors):
                ref = F.evaluate(x) @ ref
            worst = max(worst, float(np.abs(C.evaluate(x) - ref).max() / (1 + np.abs(ref).max())))
        return worst

    return min(cands, key=error)


def _boundary_checks(var, n=24):
    rng = np.random.default_rng(5)
    t = rng.random(n)
    if var == "z":
        return np.exp(2j * np.pi * t)
    return 1j * np.tan(np.pi * (t - 0.5))


def _clear_of_poles(A, x):
    return A.shape[0] == 0 or np.min(np.abs(np.linalg.eigvals(A) - x)) > 1e-6 * (1 + abs(x))


def chop(values, scale, rtol=1e-11):
    """Zero entries of a difference that are rounding noise relative to ``scale``."""
    values = np.array(values)
    values[np.abs(values) <= rtol * np.max(scale)] = 0.0
    return values


def similarity(R, P):
    """Apply the state transform ``x -> P x``; restores the split if needed.

    Returns ``(P A P^-1, P B, C P^-1, D)``.  When the transformed ``A`` no
    longer has the declared block structure, an ordered real Schur form is
    applied afterwards so the result again has unstable states first.
    """
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (R.n, R.n):
        raise SingularTransform(f"P must be {R.n}x{R.n}")
    if R.n == 0:
        return R
    s = np.linalg.svd(P, compute_uv=False)
    if s[-1] <= 1e-12 * s[0]:
        raise SingularTransform("similarity transform is singular")
    Pinv = np.linalg.inv(P)
    out = StateSpaceRealization(P @ R.A @ Pinv, P @ R.B, R.C @ Pinv, R.D, R.variable, R.n_u)
    if not out.split_ok():
        out = restore_split(out)
    return out


def restore_split(R):
    """Ordered real Schur form with the unstable eigenvalues leading."""
    if R.n == 0:
        return R
    var = R.variable
    tol = get_tolerances().stability
    if var == "z":
        def sort(re, im):
            return np.hypot(re, im) > 1 + tol
    else:
        def sort(re, im):
            return re > tol
    Tm, Z, sdim = sla.schur(R.A, output="real", sort=sort)
    Tm = Tm.copy()
    Tm[sdim:, :sdim] = 0.0
    return StateSpaceRealization(Tm, Z.T @ R.B, R.C @ Z, R.D, var, int(sdim))


def transmission_zeros(R, seed=7):
    """Finite transmission zeros of a minimal realization with ``p >= m``."""
    p, m, n = R.outputs, R.inputs, R.n
    if p < m:
        raise ValidationError("transmission zeros need at least as many rows as columns")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if p == m:
        return _square_zeros(R.A, R.B, R.C, R.D)
    rng = np.random.default_rng(seed)
    sets = []
    for _ in range(2):
        K = rng.standard_normal((m, p))
        sets.append(_square_zeros(R.A, R.B, K @ R.C, K @ R.D))
    return _intersect(sets[0], sets[1], 1e-6)


def _square_zeros(A, B, C, D):
    n, m = B.shape
    M = np.block([[A, B], [C, D]])
    N = sla.block_diag(np.eye(n), np.zeros((m, m)))
    w = sla.eigvals(M, N)
    scale = 1.0 + np.max(np.abs(np.linalg.eigvals(A))) if n else 1.0
    w = w[np.isfinite(w)]
    return w[np.abs(w) < 1e8 * scale]


def _intersect(a, b, rtol):
    out = []
    used = np.zeros(len(b), dtype=bool)
    for x in a:
        if not len(b):
            break
        d = np.where(used, np.inf, np.abs(b - x))
        j = int(np.argmin(d))
        if d[j] <= rtol * (1 + abs(x)):
            used[j] = True
            out.append(0.5 * (x + b[j]))
    return np.array(out, dtype=complex)


def hankel_rank(T, nterms=None):
    """McMillan degree from the rank of the block Hankel matrix of Markov parameters.

    Independent of :func:`minimal_realization`; used as a test oracle.
    """
    p, m = T.shape
    deg = sum(int(e.den.degree) for e in T)
    k = nterms or deg + 1
    # rescale x -> rho x so that all poles have modulus at most one
    poles = np.concatenate([e.poles() for e in T] + [np.zeros(0)])
    rho = float(np.abs(poles).max()) if poles.size else 1.0
    rho = rho if rho > 1e-12 else 1.0
    scale = rho ** np.arange(deg + 2)
    # Markov parameters: coefficients of 1/x^j in the expansion at infinity
    markov = np.zeros((2 * k + 1, p, m))
    for i in range(p):
        for j in range(m):
            e = T[i, j]
            if e.is_zero:
                continue
            dn = int(e.den.degree)
            num = Polynomial(e.num.coeffs * scale[: len(e.num.coeffs)])
            den = Polynomial(e.den.coeffs * scale[: len(e.den.coeffs)])
            num_rev = num.reversed(dn).coeffs
            den_rev = den.reversed(dn).coeffs
            markov[:, i, j] = np.real(series_divide(num_rev, den_rev, 2 * k + 1))
    H = np.block([[markov[1 + r + c] for c in range(k)] for r in range(k)])
    return _rank(H, 1e-9)


__all__ = ["StateSpaceRealization", "minimal_realization", "transfer_of", "series",
           "reduce_accurately", "product_realization", "similarity", "restore_split",
           "reduce_to_minimal", "transmission_zeros", "chop", "controllability_matrix",
           "hankel_rank"]
