"""One-step-ahead Wiener filter and the canonical feedback representation.

With an innovation model ``y = [W1; W2] e`` and an outer-inner factorization
``W2 = G2 Q2``, the predictor of ``y1(t)`` from the strict past of ``y2`` is
``F+ y2(t-1)`` with::

    F+ = [z W1 Q2*]+ G2^{-L},      K+ = W1 - z^{-1} [z W1 Q2*]+ Q2,

so that ``y1(t) = F+ y2(t-1) + K+ e(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import get_tolerances
from .errors import (BoundaryPole, DimensionMismatch, UnsupportedRank, ValidationError,
                     VariableMismatch)
from .factorization import outer_inner
from .polynomial import Polynomial, RationalFunction, poly_from_roots
from .rational import RationalMatrix, in_closed_region, strictly_stable, strictly_unstable


@dataclass(frozen=True, eq=False)
class FeedbackRepresentation:
    """``y1(t) = F+ y2(t-1) + K+ e(t)`` and ``y2 = H y1``."""

    F_plus: RationalMatrix
    K_plus: RationalMatrix
    H: RationalMatrix | None
    G2: RationalMatrix | None = None
    Q2: RationalMatrix | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def F(self):
        """Strictly causal form ``z^{-1} F+``."""
        return self.F_plus * RationalFunction.shift(-1, self.F_plus.variable)


# ---------------------------------------------------------------------------
# causal part
# ---------------------------------------------------------------------------

def _bezout_split(r, d_s, d_u):
    """``a, b`` with ``a d_u + b d_s = r``, ``deg a < deg d_s``, ``deg b < deg d_u``."""
    ns, nu = int(d_s.degree), int(d_u.degree)
    n = ns + nu
    M = np.zeros((n, n))
    for k in range(ns):
        M[k:k + nu + 1, k] = d_u.coeffs
    for k in range(nu):
        M[k:k + ns + 1, ns + k] = d_s.coeffs
    rhs = np.zeros(n)
    rhs[: len(r.coeffs)] = r.coeffs
    x = np.linalg.solve(M, rhs)
    return Polynomial(x[:ns]), Polynomial(x[ns:])


def causal_part_scalar(f):
    """Causal stable part of a scalar rational function.

    Discrete time: stable partial fractions, plus the ``z^0`` coefficient of
    the polynomial part, plus the ``z^0`` term of the antistable part's
    expansion (its value at ``z = 0``).  Continuous time: stable strictly
    proper part plus the constant of the polynomial part.
    """
    var = f.variable
    if f.is_zero:
        return f
    poles = f.poles()
    on_bnd = in_closed_region(poles, var) & ~strictly_stable(poles, var)
    if np.any(on_bnd):
        raise BoundaryPole(f"pole on the stability boundary: {poles[on_bnd]}")
    q, r = divmod(f.num, f.den)
    const = float(q.coeffs[0]) if not q.is_zero else 0.0
    st = poles[strictly_stable(poles, var)]
    un = poles[strictly_unstable(poles, var)]
    if un.size == 0:
        stable = RationalFunction(r, f.den, var)
        return stable + const
    if st.size == 0:
        a, b = Polynomial(), r
        d_s, d_u = Polynomial([1.0]), f.den
    else:
        d_s = Polynomial(poly_from_roots(st))
        d_u = Polynomial(poly_from_roots(un, f.den.lead))
        a, b = _bezout_split(r, d_s, d_u)
    out = RationalFunction(a, d_s, var) + const
    if var == "z" and not b.is_zero:
        out = out + float(b(0.0).real / d_u(0.0).real)
    return out


def causal_part(M):
    """Entrywise causal stable part ``[M]+`` of a rational matrix."""
    if isinstance(M, RationalFunction):
        return causal_part_scalar(M)
    return RationalMatrix([[causal_part_scalar(e) for e in row] for row in M.entries],
                          M.variable, shape=M.shape)


# ---------------------------------------------------------------------------
# Wiener filter
# ---------------------------------------------------------------------------

def left_inverse(G):
    """``(G* G)^{-1} G*`` for a tall full-column-rank ``G``."""
    Gs = G.para_conjugate()
    return (Gs @ G).inverse() @ Gs


def wiener_filter(W1, W2):
    """Canonical forward loop of the feedback model for ``y = [W1; W2] e``.

    Parameters
    ----------
    W1 : RationalMatrix
        ``m x m`` block of a minimum-phase factor.
    W2 : RationalMatrix
        ``p x m`` block.

    Returns
    -------
    FeedbackRepresentation

    Raises
    ------
    UnsupportedRank
        If ``0 < rank W2 < m`` (co-inner ``Q2`` would be needed).
    """
    if W1.variable != "z" or W2.variable != "z":
        if W1.variable != W2.variable:
            raise VariableMismatch("W1 and W2 use different variables")
        raise ValidationError("the one-step predictor is defined in discrete time")
    m = W1.cols
    if W1.rows != m or W2.cols != m:
        raise DimensionMismatch(f"W1 {W1.shape} and W2 {W2.shape} are not conformable")
    p = W2.rows
    zinv = RationalFunction.shift(-1, "z")
    H = W2 @ W1.inverse() if p and W1.normal_rank == m else None
    r = W2.normal_rank if p else 0
    if r == 0:
        F_plus = RationalMatrix.zero(m, p, "z")
        rep = FeedbackRepresentation(F_plus, W1, H, None, None, {"rank_W2": 0})
    elif r < m:
        raise UnsupportedRank(f"W2 has rank {r} < m = {m}; co-inner factors are not supported")
    else:
        G2, Q2 = outer_inner(W2)
        S = (W1 @ Q2.para_conjugate()) * RationalFunction.shift(1, "z")
        Sp = causal_part(S)
        F_plus = Sp @ left_inverse(G2)
        K_plus = W1 - (Sp @ Q2) * zinv
        rep = FeedbackRepresentation(F_plus, K_plus, H, G2, Q2, {"rank_W2": r,
                                                                  "causal_part": Sp})
    rep.diagnostics.update(check_feedback(rep, W1, W2))
    return rep


def check_feedback(rep, W1, W2):
    """Strict causality, stability of ``F`` and the reconstruction identity."""
    F = rep.F
    strictly_causal = bool(F.is_proper and np.allclose(F.value_at_infinity(), 0.0,
                                                       atol=1e-12))
    poles = np.concatenate([e.poles() for e in F]) if F.rows * F.cols else np.zeros(0)
    stable = bool(np.all(strictly_stable(poles, "z")))
    recon = F @ W2 + rep.K_plus if W2.rows else rep.K_plus
    pts = RationalMatrix.hstack([recon, W1]).safe_points(12)
    dev = max(float(np.abs(recon.evaluate(pt) - W1.evaluate(pt)).max()) for pt in pts)
    return {"strictly_causal": strictly_causal, "F_stable": stable,
            "reconstruction_residual": dev,
            "reconstruction_ok": dev <= get_tolerances().residual * 10}


__all__ = ["FeedbackRepresentation", "causal_part", "causal_part_scalar", "left_inverse",
           "wiener_filter", "check_feedback"]
