"""Real polynomials and scalar rational functions in ``z`` or ``s``.

Coefficients are stored in ascending order.  Rational functions are always
held in canonical form: monic denominator, numerator and denominator free of
common roots (up to the cancellation tolerance).
"""
from __future__ import annotations

import numpy as np
from numpy.polynomial import polynomial as P

from .config import get_tolerances
from .errors import PoleProximity, ValidationError, VariableMismatch

VARIABLES = ("z", "s")


# ---------------------------------------------------------------------------
# root utilities
# ---------------------------------------------------------------------------

def _quadratic_roots(c0, c1, c2):
    disc = c1 * c1 - 4.0 * c2 * c0
    if disc >= 0:
        sq = np.sqrt(disc)
        q = -0.5 * (c1 + np.copysign(sq, c1))
        if q == 0.0:
            return np.array([0.0, 0.0], dtype=complex)
        return np.array([q / c2, c0 / q], dtype=complex)
    sq = np.sqrt(-disc)
    re = -c1 / (2.0 * c2)
    im = sq / (2.0 * abs(c2))
    return np.array([re + 1j * im, re - 1j * im])


def polynomial_roots(coeffs, polish=True):
    """Roots of the ascending-coefficient polynomial ``coeffs``.

    Exact zero roots are split off first; degrees one and two are solved in
    closed form, higher degrees through companion-matrix eigenvalues followed
    by Newton polishing of isolated roots.
    """
    c = np.asarray(coeffs, dtype=float)
    nz = 0
    while nz < len(c) - 1 and c[nz] == 0.0:
        nz += 1
    c = c[nz:]
    deg = len(c) - 1
    if deg <= 0:
        r = np.zeros(0, dtype=complex)
    elif deg == 1:
        r = np.array([-c[0] / c[1]], dtype=complex)
    elif deg == 2:
        r = _quadratic_roots(c[0], c[1], c[2])
    else:
        r = np.roots(c[::-1]).astype(complex)
        if polish:
            r = _polish(c, r)
    return np.concatenate([np.zeros(nz, dtype=complex), r])


def _polish(c, roots, steps=3):
    tol = get_tolerances().cluster
    dc = P.polyder(c)
    out = roots.copy()
    for i, r in enumerate(roots):
        others = np.delete(roots, i)
        if others.size and np.min(np.abs(others - r)) < 1e3 * tol * (1 + abs(r)):
            continue
        best, fbest = r, abs(P.polyval(r, c))
        x = r
        for _ in range(steps):
            d = P.polyval(x, dc)
            if d == 0:
                break
            x = x - P.polyval(x, c) / d
            fx = abs(P.polyval(x, c))
            if fx < fbest:
                best, fbest = x, fx
        out[i] = best
    # keep exact conjugate symmetry
    for i, r in enumerate(out):
        if abs(roots[i].imag) == 0.0:
            out[i] = r.real
    return _symmetrize(out)


def _symmetrize(roots):
    """Force a root list of a real polynomial to be closed under conjugation."""
    roots = np.asarray(roots, dtype=complex)
    out = roots.copy()
    used = np.zeros(len(roots), dtype=bool)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        used[i] = True
        if r.imag == 0.0:
            continue
        cand = [j for j in range(len(roots)) if not used[j]]
        if not cand:
            continue
        j = min(cand, key=lambda k: abs(roots[k] - np.conj(r)))
        if abs(roots[j] - np.conj(r)) <= 1e-6 * (1 + abs(r)):
            used[j] = True
            avg = 0.5 * (r + np.conj(roots[j]))
            out[i] = avg
            out[j] = np.conj(avg)
    return out


class RootCluster:
    """A group of nearby roots standing for one (possibly multiple) root."""

    __slots__ = ("members", "center")

    def __init__(self, members):
        self.members = np.asarray(members, dtype=complex)
        c = self.members.mean()
        if abs(c.imag) <= get_tolerances().cluster * (1 + abs(c)):
            c = complex(c.real, 0.0)
        self.center = c

    @property
    def multiplicity(self):
        return len(self.members)

    def __repr__(self):
        return f"RootCluster({self.center:.6g}, k={self.multiplicity})"


def cluster_roots(roots, rtol=None):
    """Single-linkage clustering of ``roots`` at relative distance ``rtol``."""
    if rtol is None:
        rtol = get_tolerances().cluster
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) <= rtol * (1 + abs(roots[i])):
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots[i])
    return [RootCluster(g) for g in groups.values()]


def merge_near_multiple(p, btol=1e-9, radii=(1e-5, 1e-4, 1e-3)):
    """Roots of ``p`` with near-multiple clusters collapsed to their centroid.

    A multiple root of a polynomial with coefficient noise ``eta`` is
    computed as a cluster of spread ``eta**(1/k)``.  Clusters found at the
    growing ``radii`` are collapsed when the rebuilt polynomial stays within
    ``btol`` (relative to the largest coefficient) of ``p``.
    """
    roots = np.array(p.roots(), dtype=complex)
    if roots.size < 2:
        return roots
    c = p.coeffs
    ref = btol * np.abs(c).max()

    def error(rs):
        return np.abs(poly_from_roots(rs, c[-1]) - c).max()

    for radius in radii:
        for cl in cluster_roots(roots, radius):
            if cl.multiplicity < 2 or np.all(cl.members == cl.center):
                continue
            trial = roots.copy()
            idx = [int(np.where(trial == r)[0][0]) for r in cl.members]
            trial[idx] = cl.center
            if error(trial) <= max(ref, error(roots)):
                roots = trial
    return roots


def match_clusters(a, b, rtol):
    """Greedy matching of two cluster lists by center distance.

    Returns ``(i, j, k)`` triples meaning ``k`` copies of the root are shared
    by ``a[i]`` and ``b[j]``.
    """
    pairs = []
    for i, ca in enumerate(a):
        for j, cb in enumerate(b):
            d = abs(ca.center - cb.center)
            if d < rtol * (1 + abs(ca.center)):
                pairs.append((d, i, j))
    pairs.sort()
    used_a, used_b, out = set(), set(), []
    for _, i, j in pairs:
        if i in used_a or j in used_b:
            continue
        used_a.add(i)
        used_b.add(j)
        out.append((i, j, min(a[i].multiplicity, b[j].multiplicity)))
    return out


def poly_from_roots(roots, lead=1.0):
    """Ascending real coefficients of ``lead * prod(x - r)``."""
    roots = np.asarray(roots, dtype=complex)
    if roots.size == 0:
        return np.array([float(lead)])
    c = np.poly(roots)[::-1]
    return float(lead) * np.real(c)


def taylor_shift(coeffs, a):
    """Coefficients of ``p(a + t)`` in ascending powers of ``t``."""
    c = np.array(coeffs, dtype=complex)
    n = len(c)
    for i in range(n - 1):
        for k in range(n - 2, i - 1, -1):
            c[k] += a * c[k + 1]
    return c


def series_divide(num, den, nterms):
    """First ``nterms`` power-series coefficients of ``num / den`` (den[0] != 0)."""
    num = np.concatenate([np.asarray(num, dtype=complex), np.zeros(nterms)])
    den = np.asarray(den, dtype=complex)
    out = np.zeros(nterms, dtype=complex)
    for k in range(nterms):
        acc = num[k]
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out[k] = acc / den[0]
    return out


# ---------------------------------------------------------------------------
# Polynomial
# ---------------------------------------------------------------------------

def _trim(c, rtol):
    c = np.asarray(c, dtype=float)
    if c.size == 0:
        return c
    scale = np.max(np.abs(c))
    if scale == 0.0:
        return c[:0]
    n = len(c)
    while n > 0 and abs(c[n - 1]) <= rtol * scale:
        n -= 1
    return c[:n].copy()


class Polynomial:
    """Real polynomial with ascending coefficients.

    Trailing coefficients negligible relative to the largest one are trimmed;
    the zero polynomial has no coefficients and degree ``-inf``.
    """

    __slots__ = ("_c", "_roots")

    def __init__(self, coeffs=(), trim=True):
        if isinstance(coeffs, Polynomial):
            c = coeffs._c
        else:
            c = np.atleast_1d(np.asarray(coeffs, dtype=float)).ravel()
        if not np.all(np.isfinite(c)):
            raise ValidationError("polynomial coefficients must be finite")
        if trim:
            c = _trim(c, get_tolerances().zero)
        else:
            c = c.copy()
        c.setflags(write=False)
        self._c = c
        self._roots = None

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        return cls(poly_from_roots(roots, lead))

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return len(self._c) - 1 if len(self._c) else -np.inf

    @property
    def is_zero(self):
        return len(self._c) == 0

    @property
    def lead(self):
        return self._c[-1] if len(self._c) else 0.0

    def roots(self):
        if self._roots is None:
            r = polynomial_roots(self._c) if len(self._c) > 1 else np.zeros(0, complex)
            r.setflags(write=False)
            self._roots = r
        return self._roots

    def __call__(self, x):
        if self.is_zero:
            return np.zeros_like(np.asarray(x, dtype=complex))
        return P.polyval(x, self._c)

    def __len__(self):
        return len(self._c)

    def _combine(self, other, sign):
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        out = a + sign * b
        scale = max(np.max(np.abs(a), initial=0.0), np.max(np.abs(b), initial=0.0))
        out[np.abs(out) <= get_tolerances().zero * scale] = 0.0
        return Polynomial(out)

    def __add__(self, other):
        return self._combine(other, 1.0)

    __radd__ = __add__

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __rsub__(self, other):
        return _as_poly(other)._combine(self, -1.0)

    def __neg__(self):
        return Polynomial(-self._c, trim=False)

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self._c * float(other))
        other = _as_poly(other)
        if self.is_zero or other.is_zero:
            return Polynomial()
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __divmod__(self, other):
        other = _as_poly(other)
        if self.is_zero:
            return Polynomial(), Polynomial()
        q, r = P.polydiv(self._c, other._c)
        return Polynomial(q), Polynomial(r)

    def derivative(self):
        return Polynomial(P.polyder(self._c)) if len(self._c) > 1 else Polynomial()

    def reversed(self, degree):
        """Coefficients of ``x**degree * p(1/x)``."""
        c = np.zeros(int(degree) + 1)
        c[: len(self._c)] = self._c
        return Polynomial(c[::-1])

    def mirrored(self):
        """``p(-x)``."""
        signs = (-1.0) ** np.arange(len(self._c))
        return Polynomial(self._c * signs, trim=False)

    def allclose(self, other, atol=1e-9):
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        a = np.zeros(n)
        b = np.zeros(n)
        a[: len(self._c)] = self._c
        b[: len(other._c)] = other._c
        return bool(np.all(np.abs(a - b) <= atol))

    def __repr__(self):
        return f"Polynomial({list(self._c)})"


def _as_poly(x):
    if isinstance(x, Polynomial):
        return x
    if np.isscalar(x):
        return Polynomial([float(x)])
    return Polynomial(x)


# ---------------------------------------------------------------------------
# RationalFunction
# ---------------------------------------------------------------------------

def _canonical(num, den):
    if den.is_zero:
        raise ValidationError("denominator is the zero polynomial")
    if num.is_zero:
        return Polynomial(), Polynomial([1.0])
    num, den, _ = _cancel_common(num, den)
    lead = den.lead
    return Polynomial(num.coeffs / lead), Polynomial(den.coeffs / lead)


def _cancel_common(p1, p2):
    """Divide out common roots of ``p1`` and ``p2``; returns the common roots too.

    Roots are first matched at the tight cluster radius.  A second pass
    groups roots at a looser radius and matches cluster centroids, which stay
    accurate for multiple roots even when the individual roots do not.
    """
    tol = get_tolerances()
    common = []
    for radius in (tol.cluster, tol.cluster_loose):
        if p1.degree <= 0 or p2.degree <= 0:
            break
        c1 = cluster_roots(p1.roots(), radius)
        c2 = cluster_roots(p2.roots(), radius)
        matches = match_clusters(c1, c2, tol.cancel)
        if matches:
            g = _common_roots(c1, c2, matches)
            p1, p2 = _divide(p1, g), _divide(p2, g)
            common.extend(g)
    return p1, p2, common


def _common_roots(a, b, matches):
    """Centers of matched clusters, repeated by shared multiplicity."""
    common = []
    for i, j, k in matches:
        common.extend([0.5 * (a[i].center + b[j].center)] * k)
    return common


def _deflate_root(c, r):
    """Quotient of ascending coefficients ``c`` by ``(x - r)``, numerically stable."""
    n = len(c) - 1
    q = np.zeros(n, dtype=complex)
    if abs(r) <= 1.0:
        q[n - 1] = c[n]
        for k in range(n - 1, 0, -1):
            q[k - 1] = c[k] + r * q[k]
    else:
        q[0] = -c[0] / r
        for k in range(1, n):
            q[k] = (q[k - 1] - c[k]) / r
    return q


def _divide(p, roots):
    """Quotient of ``p`` by ``prod(x - r)``; remainders are dropped."""
    c = np.asarray(p.coeffs, dtype=complex)
    for r in roots:
        if len(c) <= 1:
            break
        c = _deflate_root(c, complex(r))
    return Polynomial(c.real)


class RationalFunction:
    """Scalar real rational function ``num/den`` in ``z`` (discrete) or ``s``.

    Parameters
    ----------
    num, den : Polynomial or sequence of float
        Ascending coefficients.
    variable : {"z", "s"}
    canonical : bool
        Skip canonicalization only when the caller guarantees it.
    """

    __slots__ = ("num", "den", "variable")

    def __init__(self, num, den=(1.0,), variable="z", canonical=True):
        if variable not in VARIABLES:
            raise ValidationError(f"variable must be 'z' or 's', got {variable!r}")
        num = _as_poly(num)
        den = _as_poly(den)
        if canonical:
            num, den = _canonical(num, den)
        elif den.is_zero:
            raise ValidationError("denominator is the zero polynomial")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)
        object.__setattr__(self, "variable", variable)

    def __setattr__(self, key, value):
        raise AttributeError("RationalFunction is immutable")

    # -- constructors --------------------------------------------------------
    @classmethod
    def constant(cls, value, variable="z"):
        return cls([float(value)], [1.0], variable, canonical=False)

    @classmethod
    def from_zpk(cls, zeros, poles, gain, variable="z"):
        return cls(poly_from_roots(zeros, gain), poly_from_roots(poles), variable)

    @classmethod
    def shift(cls, k, variable="z"):
        """``variable**k`` for integer ``k``."""
        c = np.zeros(abs(k) + 1)
        c[-1] = 1.0
        return cls(c, [1.0], variable) if k >= 0 else cls([1.0], c, variable)

    # -- properties ----------------------------------------------------------
    @property
    def is_zero(self):
        return self.num.is_zero

    @property
    def is_constant(self):
        return self.num.degree <= 0 and self.den.degree == 0

    @property
    def is_proper(self):
        return self.is_zero or self.num.degree <= self.den.degree

    @property
    def is_strictly_proper(self):
        return self.is_zero or self.num.degree < self.den.degree

    @property
    def degree(self):
        """McMillan degree of the scalar function."""
        return int(max(self.den.degree, max(self.num.degree, 0)))

    def poles(self):
        return self.den.roots()

    def zeros(self):
        return self.num.roots()

    def value_at_infinity(self):
        if self.is_zero or self.num.degree < self.den.degree:
            return 0.0
        if self.num.degree == self.den.degree:
            return self.num.lead / self.den.lead
        return np.inf

    # -- evaluation ----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=complex)
        poles = self.poles()
        if poles.size:
            tol = get_tolerances().pole_proximity
            d = np.abs(x[..., None] - poles)
            if np.any(d <= tol * (1 + np.abs(poles))):
                raise PoleProximity(f"evaluation point within tolerance of a pole of {self}")
        return self.num(x) / self.den(x)

    # -- arithmetic ----------------------------------------------------------
    def _check(self, other):
        if isinstance(other, RationalFunction):
            if other.variable != self.variable:
                raise VariableMismatch(f"{self.variable} vs {other.variable}")
            return other
        if np.isscalar(other):
            return RationalFunction.constant(float(other), self.variable)
        raise TypeError(f"unsupported operand {type(other)}")

    def __add__(self, other):
        other = self._check(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        if np.array_equal(self.den.coeffs, other.den.coeffs):
            return RationalFunction(self.num + other.num, self.den, self.variable)
        a, b, g = _split_common(self.den, other.den)
        num = self.num * b + other.num * a
        return RationalFunction(num, g * a * b, self.variable)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, self.variable, canonical=False)

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def __mul__(self, other):
        if np.isscalar(other):
            if other == 0:
                return RationalFunction.constant(0.0, self.variable)
            return RationalFunction(self.num * float(other), self.den, self.variable,
                                    canonical=False)
        other = self._check(other)
        if self.is_zero or other.is_zero:
            return RationalFunction.constant(0.0, self.variable)
        return RationalFunction(self.num * other.num, self.den * other.den, self.variable)

    __rmul__ = __mul__

    def reciprocal(self):
        if self.is_zero:
            from .errors import SingularMatrix
            raise SingularMatrix("reciprocal of the zero rational function")
        return RationalFunction(self.den, self.num, self.variable)

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / float(other))
        return self * self._check(other).reciprocal()

    def __rtruediv__(self, other):
        return self._check(other) * self.reciprocal()

    def para_conjugate(self):
        """``f(1/z)`` (discrete) or ``f(-s)`` (continuous); real coefficients."""
        if self.is_zero:
            return self
        if self.variable == "s":
            return RationalFunction(self.num.mirrored(), self.den.mirrored(), "s")
        dn, dd = int(self.num.degree), int(self.den.degree)
        n = max(dn, dd)
        return RationalFunction(self.num.reversed(n), self.den.reversed(n), "z")

    def substitute_moebius(self, a, b, c, d, variable=None):
        """Substitute ``x = (a*y + b) / (c*y + d)``."""
        variable = variable or self.variable
        if self.is_zero:
            return RationalFunction.constant(0.0, variable)
        n = int(max(self.num.degree, self.den.degree))
        lin_num = Polynomial([b, a])
        lin_den = Polynomial([d, c])

        def sub(p):
            out = Polynomial()
            for i, ci in enumerate(p.coeffs):
                if ci != 0.0:
                    out = out + (lin_num ** i) * (lin_den ** (n - i)) * ci
            return out

        return RationalFunction(sub(self.num), sub(self.den), variable)

    def allclose(self, other, atol=1e-9):
        """Coefficientwise comparison of canonical forms."""
        other = self._check(other)
        return self.num.allclose(other.num, atol) and self.den.allclose(other.den, atol)

    def coeff_distance(self, other):
        other = self._check(other)
        out = 0.0
        for a, b in ((self.num, other.num), (self.den, other.den)):
            n = max(len(a), len(b))
            x = np.zeros(n)
            y = np.zeros(n)
            x[: len(a)] = a.coeffs
            y[: len(b)] = b.coeffs
            out = max(out, float(np.max(np.abs(x - y), initial=0.0)))
        return out

    # -- serialization -------------------------------------------------------
    def to_dict(self):
        return {"num": [float(c) for c in self.num.coeffs],
                "den": [float(c) for c in self.den.coeffs]}

    def __repr__(self):
        v = self.variable
        return f"({_fmt_poly(self.num, v)})/({_fmt_poly(self.den, v)})"


def _split_common(d1, d2):
    """Return ``a, b, g`` with ``d1 ~ g*a`` and ``d2 ~ g*b``."""
    a, b, common = _cancel_common(d1, d2)
    return a, b, Polynomial(poly_from_roots(common))


def _fmt_poly(p, v):
    if p.is_zero:
        return "0"
    terms = []
    for i in range(len(p.coeffs) - 1, -1, -1):
        c = p.coeffs[i]
        if c == 0.0:
            continue
        if i == 0:
            terms.append(f"{c:+.6g}")
        elif i == 1:
            terms.append(f"{c:+.6g}*{v}")
        else:
            terms.append(f"{c:+.6g}*{v}^{i}")
    s = " ".join(terms)
    return s[1:] if s.startswith("+") else s
