"""Rational transfer-function matrices.

A :class:`RationalMatrix` is an immutable grid of canonical
:class:`~specfact.polynomial.RationalFunction` entries sharing one variable
(``"z"`` for discrete time, ``"s"`` for continuous time).
"""
from __future__ import annotations

from functools import cached_property

import numpy as np

from .config import get_tolerances
from .errors import (DimensionMismatch, DocumentError, RankDeficientInput,
                     SingularMatrix, ValidationError, VariableMismatch)
from .polynomial import VARIABLES, RationalFunction

_RNG_SEED = 20240607


def boundary_points(variable, n):
    """``n`` points on the stability boundary (unit circle or imaginary axis)."""
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    if variable == "z":
        return np.exp(1j * theta)
    # map the circle onto the imaginary axis, avoiding s = +-i*inf
    return 1j * np.tan((theta - np.pi) / 2)


def random_points(n, seed=_RNG_SEED):
    rng = np.random.default_rng(seed)
    r = 0.6 + 0.9 * rng.random(n)
    return r * np.exp(2j * np.pi * rng.random(n))


class RationalMatrix:
    """Matrix of real rational functions.

    Parameters
    ----------
    entries : sequence of sequences of RationalFunction (or numbers)
        Row-major grid.
    variable : {"z", "s"}
    """

    def __init__(self, entries, variable="z", shape=None):
        if variable not in VARIABLES:
            raise ValidationError(f"variable must be 'z' or 's', got {variable!r}")
        rows = []
        for row in entries:
            out = []
            for e in row:
                if isinstance(e, RationalFunction):
                    if e.variable != variable:
                        raise VariableMismatch(f"entry in {e.variable}, matrix in {variable}")
                    out.append(e)
                else:
                    out.append(RationalFunction.constant(float(e), variable))
            rows.append(tuple(out))
        if shape is None:
            shape = (len(rows), len(rows[0]) if rows else 0)
        if len(rows) != shape[0] or any(len(r) != shape[1] for r in rows):
            raise DimensionMismatch("ragged or inconsistent entry grid")
        self._entries = tuple(rows)
        self._shape = (int(shape[0]), int(shape[1]))
        self._variable = variable

    # -- constructors --------------------------------------------------------
    @classmethod
    def constant(cls, matrix, variable="z"):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls([[RationalFunction.constant(v, variable) for v in row] for row in m],
                   variable, shape=m.shape)

    @classmethod
    def identity(cls, n, variable="z"):
        return cls.constant(np.eye(n), variable)

    @classmethod
    def zero(cls, rows, cols, variable="z"):
        """All-zero ``rows x cols`` matrix."""
        return cls([[RationalFunction.constant(0.0, variable)] * cols for _ in range(rows)],
                   variable, shape=(rows, cols))

    @classmethod
    def scalar(cls, f):
        return cls([[f]], f.variable)

    @classmethod
    def diag(cls, items):
        items = list(items)
        v = items[0].variable
        n = len(items)
        return cls([[items[i] if i == j else RationalFunction.constant(0.0, v)
                     for j in range(n)] for i in range(n)], v)

    @classmethod
    def hstack(cls, blocks):
        blocks = [b for b in blocks]
        v = blocks[0].variable
        rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise DimensionMismatch("hstack row mismatch")
        grid = [sum((list(b._entries[i]) for b in blocks), []) for i in range(rows)]
        return cls(grid, v, shape=(rows, sum(b.cols for b in blocks)))

    @classmethod
    def vstack(cls, blocks):
        blocks = [b for b in blocks]
        v = blocks[0].variable
        cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise DimensionMismatch("vstack column mismatch")
        grid = [list(r) for b in blocks for r in b._entries]
        return cls(grid, v, shape=(sum(b.rows for b in blocks), cols))

    # -- basic properties ----------------------------------------------------
    @property
    def shape(self):
        return self._shape

    @property
    def rows(self):
        return self._shape[0]

    @property
    def cols(self):
        return self._shape[1]

    @property
    def variable(self):
        return self._variable

    @property
    def entries(self):
        return self._entries

    def __getitem__(self, idx):
        if isinstance(idx, tuple) and all(isinstance(i, (int, np.integer)) for i in idx):
            return self._entries[idx[0]][idx[1]]
        ri, ci = idx if isinstance(idx, tuple) else (idx, slice(None))
        rows = range(self.rows)[ri] if isinstance(ri, slice) else [ri]
        cols = range(self.cols)[ci] if isinstance(ci, slice) else [ci]
        rows, cols = list(rows), list(cols)
        return RationalMatrix([[self._entries[i][j] for j in cols] for i in rows],
                              self._variable, shape=(len(rows), len(cols)))

    def __iter__(self):
        for row in self._entries:
            yield from row

    @property
    def T(self):
        return RationalMatrix([[self._entries[i][j] for i in range(self.rows)]
                               for j in range(self.cols)], self._variable,
                              shape=(self.cols, self.rows))

    @property
    def is_proper(self):
        return all(e.is_proper for e in self)

    @property
    def is_constant(self):
        return all(e.is_constant or e.is_zero for e in self)

    def value_at_infinity(self):
        return np.array([[e.value_at_infinity() for e in row] for row in self._entries],
                        dtype=float).reshape(self._shape)

    # -- evaluation ----------------------------------------------------------
    def evaluate(self, point):
        """Complex matrix ``M(point)``; raises PoleProximity near a pole."""
        out = np.empty(self._shape, dtype=complex)
        for i, row in enumerate(self._entries):
            for j, e in enumerate(row):
                out[i, j] = e(point)
        return out

    def evaluate_many(self, points):
        """Array of shape ``(len(points), rows, cols)``."""
        points = np.asarray(points, dtype=complex).ravel()
        out = np.empty((len(points),) + self._shape, dtype=complex)
        for i, row in enumerate(self._entries):
            for j, e in enumerate(row):
                out[:, i, j] = e(points)
        return out

    def poles_of_entries(self):
        allp = [e.poles() for e in self]
        return np.concatenate(allp) if allp else np.zeros(0, complex)

    def safe_points(self, n, seed=_RNG_SEED):
        """``n`` random points well away from every entry pole."""
        poles = self.poles_of_entries()
        rng = np.random.default_rng(seed)
        out = []
        while len(out) < n:
            p = (0.6 + 0.9 * rng.random()) * np.exp(2j * np.pi * rng.random())
            if poles.size == 0 or np.min(np.abs(poles - p)) > 1e-3 * (1 + abs(p)):
                out.append(p)
        return np.array(out)

    # -- arithmetic ----------------------------------------------------------
    def _same(self, other):
        if other.variable != self._variable:
            raise VariableMismatch(f"{self._variable} vs {other.variable}")

    def __add__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        self._same(other)
        if other.shape != self.shape:
            raise DimensionMismatch(f"{self.shape} + {other.shape}")
        return RationalMatrix([[a + b for a, b in zip(ra, rb)]
                               for ra, rb in zip(self._entries, other._entries)],
                              self._variable, shape=self._shape)

    def __neg__(self):
        return RationalMatrix([[-a for a in r] for r in self._entries], self._variable,
                              shape=self._shape)

    def __sub__(self, other):
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return self + (-other)

    def __matmul__(self, other):
        if not isinstance(other, RationalMatrix):
            if isinstance(other, np.ndarray):
                other = RationalMatrix.constant(other, self._variable)
            else:
                return NotImplemented
        self._same(other)
        if self.cols != other.rows:
            raise DimensionMismatch(f"{self.shape} @ {other.shape}")
        zero = RationalFunction.constant(0.0, self._variable)
        grid = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a = self._entries[i][k]
                    b = other._entries[k][j]
                    if a.is_zero or b.is_zero:
                        continue
                    acc = acc + a * b
                row.append(acc)
            grid.append(row)
        return RationalMatrix(grid, self._variable, shape=(self.rows, other.cols))

    def __rmatmul__(self, other):
        if isinstance(other, np.ndarray):
            return RationalMatrix.constant(other, self._variable) @ self
        return NotImplemented

    def __mul__(self, other):
        """Entrywise scaling by a scalar or a scalar rational function."""
        if isinstance(other, RationalMatrix):
            raise TypeError("use @ for matrix products")
        return RationalMatrix([[a * other for a in r] for r in self._entries],
                              self._variable, shape=self._shape)

    __rmul__ = __mul__

    def para_conjugate(self):
        return RationalMatrix([[self._entries[i][j].para_conjugate() for i in range(self.rows)]
                               for j in range(self.cols)], self._variable,
                              shape=(self.cols, self.rows))

    def det(self):
        n = self.rows
        if n != self.cols:
            raise DimensionMismatch("determinant of a non-square matrix")
        if n == 0:
            return RationalFunction.constant(1.0, self._variable)
        if n == 1:
            return self._entries[0][0]
        if n == 2:
            e = self._entries
            return e[0][0] * e[1][1] - e[0][1] * e[1][0]
        acc = RationalFunction.constant(0.0, self._variable)
        for j in range(n):
            a = self._entries[0][j]
            if a.is_zero:
                continue
            minor = self._minor(0, j).det()
            term = a * minor
            acc = acc + (term if j % 2 == 0 else -term)
        return acc

    def _minor(self, i, j):
        rows = [r for r in range(self.rows) if r != i]
        cols = [c for c in range(self.cols) if c != j]
        return RationalMatrix([[self._entries[r][c] for c in cols] for r in rows],
                              self._variable, shape=(len(rows), len(cols)))

    def inverse(self):
        """Inverse of a square matrix.

        Proper matrices with an invertible value at infinity are inverted on
        a minimal realization (``A - B D^{-1} C``), which avoids the
        high-degree cancellations of the adjugate; otherwise the adjugate /
        determinant formula is used.
        """
        n = self.rows
        if n != self.cols:
            raise DimensionMismatch("inverse of a non-square matrix")
        if n and self.is_proper:
            D = self.value_at_infinity()
            if np.all(np.isfinite(D)) and np.linalg.cond(D) < 1e8:
                return self._inverse_state_space(D)
        d = self.det()
        if d.is_zero:
            raise SingularMatrix("determinant is the zero rational function")
        dinv = d.reciprocal()
        if n == 1:
            return RationalMatrix([[dinv]], self._variable)
        grid = []
        for i in range(n):
            row = []
            for j in range(n):
                cof = self._minor(j, i).det()
                if (i + j) % 2:
                    cof = -cof
                row.append(cof * dinv)
            grid.append(row)
        return RationalMatrix(grid, self._variable, shape=(n, n))

    def _inverse_state_space(self, D):
        from .realization import (StateSpaceRealization, minimal_realization,
                                  reduce_accurately, transfer_of)
        R = minimal_realization(self)
        Dinv = np.linalg.inv(D)
        Ri = StateSpaceRealization(R.A - R.B @ Dinv @ R.C, R.B @ Dinv, -Dinv @ R.C, Dinv,
                                   self._variable, 0)
        return transfer_of(reduce_accurately(Ri))

    def substitute_moebius(self, a, b, c, d, variable):
        return RationalMatrix([[e.substitute_moebius(a, b, c, d, variable) for e in r]
                               for r in self._entries], variable, shape=self._shape)

    # -- rank ----------------------------------------------------------------
    @cached_property
    def normal_rank(self):
        """Rank at a random point, confirmed at a second random point."""
        if self.rows == 0 or self.cols == 0:
            return 0
        ranks = []
        for p in self.safe_points(2):
            s = np.linalg.svd(self.evaluate(p), compute_uv=False)
            if s[0] == 0.0:
                ranks.append(0)
            else:
                ranks.append(int(np.sum(s > get_tolerances().rank * s[0])))
        return max(ranks)

    # -- poles / zeros / stability --------------------------------------------
    def poles(self):
        """Poles with McMillan multiplicity (eigenvalues of a minimal realization)."""
        from .realization import minimal_realization
        return _sort_complex(np.linalg.eigvals(minimal_realization(self).A))

    def zeros(self):
        """Finite transmission zeros (system-pencil generalized eigenvalues)."""
        if self.normal_rank < self.cols:
            raise RankDeficientInput(
                f"normal column rank {self.normal_rank} < {self.cols} columns")
        from .realization import minimal_realization, transmission_zeros
        return _sort_complex(transmission_zeros(minimal_realization(self)))

    def is_stable(self):
        return bool(np.all(strictly_stable(self.poles(), self._variable)))

    def is_minimum_phase(self):
        if not self.is_stable():
            return False
        if not np.all(in_closed_region(self.zeros(), self._variable)):
            return False
        if self._variable == "z":
            # zeros at infinity lie outside the closed unit disk
            D = self.value_at_infinity()
            if np.linalg.matrix_rank(D, tol=get_tolerances().rank * max(1.0, np.abs(D).max())) \
                    < self.cols:
                return False
        return True

    # -- comparison ----------------------------------------------------------
    def allclose(self, other, rtol=1e-8, npoints=24, seed=_RNG_SEED):
        """Equality as rational functions, tested at random non-pole points."""
        if self.shape != other.shape or self.variable != other.variable:
            return False
        pts = RationalMatrix.hstack([self, other]).safe_points(npoints, seed) \
            if self.rows else np.zeros(0)
        if pts.size == 0:
            return True
        a = self.evaluate_many(pts)
        b = other.evaluate_many(pts)
        scale = 1.0 + np.maximum(np.abs(a), np.abs(b))
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def coeff_distance(self, other):
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")
        return max((a.coeff_distance(b) for a, b in zip(self, other)), default=0.0)

    # -- serialization -------------------------------------------------------
    def to_dict(self):
        return {"variable": self._variable, "rows": self.rows, "cols": self.cols,
                "entries": [[e.to_dict() for e in row] for row in self._entries]}

    @classmethod
    def from_dict(cls, doc, path="$"):
        if not isinstance(doc, dict):
            raise DocumentError(path, "expected an object")
        for key in ("variable", "rows", "cols", "entries"):
            if key not in doc:
                raise DocumentError(f"{path}.{key}", "missing field")
        var = doc["variable"]
        if var not in VARIABLES:
            raise DocumentError(f"{path}.variable", f"must be 'z' or 's', got {var!r}")
        rows, cols = doc["rows"], doc["cols"]
        if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
            raise DocumentError(f"{path}.rows", "rows/cols must be non-negative integers")
        ent = doc["entries"]
        if not isinstance(ent, list) or len(ent) != rows:
            raise DocumentError(f"{path}.entries", f"expected {rows} rows")
        grid = []
        for i, row in enumerate(ent):
            if not isinstance(row, list) or len(row) != cols:
                raise DocumentError(f"{path}.entries[{i}]", f"expected {cols} entries")
            out = []
            for j, e in enumerate(row):
                p = f"{path}.entries[{i}][{j}]"
                if not isinstance(e, dict):
                    raise DocumentError(p, "expected an object with num/den")
                for key in ("num", "den"):
                    if key not in e:
                        raise DocumentError(f"{p}.{key}", "missing field")
                    if not isinstance(e[key], list) or not all(
                            isinstance(c, (int, float)) and not isinstance(c, bool)
                            for c in e[key]):
                        raise DocumentError(f"{p}.{key}", "expected a list of numbers")
                if not any(c != 0 for c in e["den"]):
                    raise DocumentError(f"{p}.den", "zero denominator")
                out.append(RationalFunction(e["num"], e["den"], var))
            grid.append(out)
        return cls(grid, var, shape=(rows, cols))

    def __repr__(self):
        body = ";\n ".join(", ".join(repr(e) for e in row) for row in self._entries)
        return f"RationalMatrix[{self._variable}, {self.rows}x{self.cols}](\n [{body}])"


def _sort_complex(x):
    x = np.asarray(x, dtype=complex)
    x = np.where(np.abs(x.imag) < 1e-12 * (1 + np.abs(x)), x.real + 0j, x)
    return x[np.lexsort((x.imag, x.real))]


def strictly_stable(points, variable):
    """Open stability region membership with the configured margin."""
    points = np.asarray(points, dtype=complex)
    tol = get_tolerances().stability
    if variable == "z":
        return np.abs(points) < 1 - tol
    return points.real < -tol


def in_closed_region(points, variable):
    points = np.asarray(points, dtype=complex)
    tol = get_tolerances().stability
    if variable == "z":
        return np.abs(points) <= 1 + tol
    return points.real <= tol


def strictly_unstable(points, variable):
    """Complement of the closed stability region."""
    return ~in_closed_region(points, variable)


def best_partition(phi, m, seed=_RNG_SEED):
    """Greedy choice of ``m`` rows maximizing the leading block's smallest singular value.

    Returns a permutation of ``range(phi.rows)`` whose first ``m`` entries
    are the selected rows.
    """
    pt = boundary_points(phi.variable, 7)[3]
    F = phi.evaluate(pt)
    chosen = []
    for _ in range(m):
        best, best_val = None, -1.0
        for i in range(phi.rows):
            if i in chosen:
                continue
            idx = chosen + [i]
            s = np.linalg.svd(F[np.ix_(idx, idx)], compute_uv=False)
            if s[-1] > best_val:
                best, best_val = i, s[-1]
        chosen.append(best)
    return chosen + [i for i in range(phi.rows) if i not in chosen]


def permute(phi, order):
    """Symmetric row/column permutation of a square rational matrix."""
    return RationalMatrix([[phi[i, j] for j in order] for i in order], phi.variable,
                          shape=phi.shape)


__all__ = ["RationalMatrix", "boundary_points", "strictly_stable", "in_closed_region",
           "strictly_unstable", "best_partition", "permute", "random_points"]
