"""Differential forms with polynomial coefficients on a chart of R^n.

A k-form is stored as an array ``comps`` of shape (C(n, k), D+1, ..., D+1):
``comps[j]`` holds the coefficients of the j-th component (multi-indices in
lexicographic order) with ``comps[j][a1, ..., an]`` the coefficient of
x1^a1 ... xn^an. Arithmetic is exact up to floating rounding.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.signal import convolve

from .errors import InvalidDegreeError


@lru_cache(maxsize=None)
def basis(n: int, k: int) -> tuple:
    return tuple(itertools.combinations(range(n), k))


@lru_cache(maxsize=None)
def _wedge_table(n, k):
    """Entries (i, j_in, j_out, sign) with dx^i ^ dx^J_in = sign dx^J_out."""
    src = basis(n, k)
    dst = {I: j for j, I in enumerate(basis(n, k + 1))}
    out = []
    for j_in, J in enumerate(src):
        for i in range(n):
            if i in J:
                continue
            sign = -1 if sum(1 for x in J if x < i) % 2 else 1
            out.append((i, j_in, dst[tuple(sorted(J + (i,)))], sign))
    return tuple(out)


@lru_cache(maxsize=None)
def _interior_table(n, k):
    """Entries (i, j_in, j_out, sign) with iota_{e_i} dx^I_in = sign dx^I_out."""
    src = basis(n, k)
    dst = {I: j for j, I in enumerate(basis(n, k - 1))}
    out = []
    for j_in, I in enumerate(src):
        for pos, i in enumerate(I):
            out.append((i, j_in, dst[I[:pos] + I[pos + 1 :]], -1 if pos % 2 else 1))
    return tuple(out)


@lru_cache(maxsize=None)
def _total_degree(shape):
    return np.indices(shape).sum(axis=0)


def _pad(a, size):
    """Pad every polynomial axis of ``a`` (leading component axis kept) to ``size``."""
    cur = a.shape[1]
    if cur == size:
        return a
    width = [(0, 0)] + [(0, size - cur)] * (a.ndim - 1)
    return np.pad(a, width)


def _shift_matrix(size, c):
    """S with (S @ coeffs) the coefficients of p(x + c) in one variable."""
    S = np.zeros((size, size))
    for i in range(size):
        for j in range(i + 1):
            S[j, i] = math.comb(i, j) * c ** (i - j)
    return S


def poly_shift(a, shift):
    """Coefficients of p(x + shift) for a coefficient array ``a`` over n axes."""
    a = np.asarray(a, dtype=float)
    for axis, c in enumerate(shift):
        if c == 0:
            continue
        S = _shift_matrix(a.shape[axis], float(c))
        a = np.moveaxis(np.tensordot(S, a, axes=([1], [axis])), 0, axis)
    return a


def poly_eval(a, pts):
    pts = np.asarray(pts, dtype=float)
    n = a.ndim
    if n == 0:
        return np.full(pts.shape[0], float(a))
    if n > 3:
        raise InvalidDegreeError("polynomial forms support n <= 3")
    return _eval_many(a[None], pts)[:, 0]


def _eval_many(comps, pts):
    """Evaluate several coefficient arrays at once, touching only nonzero terms."""
    nz = np.argwhere(comps != 0)
    out = np.zeros((pts.shape[0], comps.shape[0]))
    cache: dict = {}

    def power(i, e):
        if (i, e) not in cache:
            cache[(i, e)] = pts[:, i] ** e
        return cache[(i, e)]

    for row in nz:
        term = None
        for i, e in enumerate(row[1:]):
            if e:
                term = power(i, e) if term is None else term * power(i, e)
        coef = comps[tuple(row)]
        if term is None:
            out[:, row[0]] += coef
        else:
            out[:, row[0]] += coef * term
    return out


class PolyForm:
    """A k-form on R^n with polynomial coefficients."""

    __slots__ = ("n", "k", "comps")

    def __init__(self, n: int, k: int, comps):
        if not 0 <= k <= n:
            raise InvalidDegreeError(f"degree {k} outside 0..{n}")
        comps = np.asarray(comps, dtype=float)
        ncomp = len(basis(n, k))
        if comps.ndim == 1 and n == 0:
            comps = comps.reshape(ncomp)
        if comps.shape[0] != ncomp or comps.ndim != n + 1:
            raise ValueError(f"expected {ncomp} components over {n} axes, got shape {comps.shape}")
        self.n, self.k, self.comps = n, k, comps

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, n, k, size=1):
        return cls(n, k, np.zeros((len(basis(n, k)),) + (size,) * n))

    @classmethod
    def constant(cls, n, k, values):
        out = cls.zeros(n, k)
        out.comps[(slice(None),) + (0,) * n] = values
        return out

    @classmethod
    def scalar(cls, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        return cls(coeffs.ndim, 0, coeffs[None])

    @classmethod
    def affine(cls, n, const, grad):
        """The 0-form const + grad . x."""
        c = np.zeros((2,) * n)
        c[(0,) * n] = const
        for i in range(n):
            idx = [0] * n
            idx[i] = 1
            c[tuple(idx)] = grad[i]
        return cls(n, 0, c[None])

    @classmethod
    def wedge_of_covectors(cls, covectors):
        """Constant form cov_1 ^ ... ^ cov_k from the rows of a k x n matrix."""
        covectors = np.atleast_2d(np.asarray(covectors, dtype=float))
        k, n = covectors.shape
        vals = [np.linalg.det(covectors[:, list(I)]) if k else 1.0 for I in basis(n, k)]
        return cls.constant(n, k, vals)

    # structure ----------------------------------------------------------
    @property
    def size(self):
        return self.comps.shape[1] if self.n else 1

    def total_degree(self) -> int:
        if self.n == 0:
            return 0
        nz = np.any(self.comps != 0, axis=0)
        if not nz.any():
            return 0
        return int(_total_degree(nz.shape)[nz].max())

    def trimmed(self) -> "PolyForm":
        """Drop trailing all-zero coefficient slabs."""
        if self.n == 0:
            return self
        nz = np.any(self.comps != 0, axis=0)
        if not nz.any():
            return PolyForm.zeros(self.n, self.k)
        size = int(np.argwhere(nz).max()) + 1
        return PolyForm(self.n, self.k, self.comps[(slice(None),) + (slice(0, size),) * self.n])

    def _like(self, other):
        if (self.n, self.k) != (other.n, other.k):
            raise InvalidDegreeError(f"cannot combine {self.k}-form and {other.k}-form")
        size = max(self.size, other.size)
        return _pad(self.comps, size), _pad(other.comps, size)

    def __add__(self, other):
        a, b = self._like(other)
        return PolyForm(self.n, self.k, a + b)

    def __sub__(self, other):
        a, b = self._like(other)
        return PolyForm(self.n, self.k, a - b)

    def __neg__(self):
        return PolyForm(self.n, self.k, -self.comps)

    def __mul__(self, c):
        return PolyForm(self.n, self.k, float(c) * self.comps)

    __rmul__ = __mul__

    def times(self, poly) -> "PolyForm":
        """Product with a scalar polynomial (a coefficient array or a 0-form)."""
        if isinstance(poly, PolyForm):
            poly = poly.comps[0]
        poly = np.asarray(poly, dtype=float)
        if self.n == 0:
            return PolyForm(0, 0, self.comps * float(poly))
        return PolyForm(self.n, self.k, np.stack([convolve(c, poly, method="direct") for c in self.comps]))

    # calculus -----------------------------------------------------------
    def d(self) -> "PolyForm":
        n, k = self.n, self.k
        if k == n:
            raise InvalidDegreeError("exterior derivative of a top-degree form")
        out = np.zeros((len(basis(n, k + 1)),) + self.comps.shape[1:])
        for i, j_in, j_out, sign in _wedge_table(n, k):
            der = P.polyder(self.comps[j_in], axis=i)
            pad = [(0, 0)] * n
            pad[i] = (0, self.comps.shape[1 + i] - der.shape[i])
            out[j_out] += sign * np.pad(der, pad)
        return PolyForm(n, k + 1, out)

    def wedge_covector(self, gamma) -> "PolyForm":
        """gamma ^ self for a constant covector gamma."""
        n, k = self.n, self.k
        out = np.zeros((len(basis(n, k + 1)),) + self.comps.shape[1:])
        for i, j_in, j_out, sign in _wedge_table(n, k):
            out[j_out] += sign * gamma[i] * self.comps[j_in]
        return PolyForm(n, k + 1, out)

    def cone(self, center) -> "PolyForm":
        """Cone contraction toward ``center``:

        y -> int_0^1 t^(k-1) omega_{c + t(y - c)}(y - c, .) dt.
        """
        n, k = self.n, self.k
        if k == 0:
            raise InvalidDegreeError("cone contraction needs degree >= 1")
        center = np.asarray(center, dtype=float)
        shifted = np.stack([poly_shift(c, center) for c in self.comps])
        shifted = shifted / (k + _total_degree(shifted.shape[1:]))
        shifted = _pad(shifted, self.size + 1)
        out = np.zeros((len(basis(n, k - 1)),) + shifted.shape[1:])
        for i, j_in, j_out, sign in _interior_table(n, k):
            # multiplying by z_i raises the exponent along axis i
            out[j_out] += sign * np.roll(shifted[j_in], 1, axis=i)
        back = np.stack([poly_shift(c, -center) for c in out])
        return PolyForm(n, k - 1, back)

    # evaluation ---------------------------------------------------------
    def __call__(self, pts) -> np.ndarray:
        """Component values at points (N x n) as an N x C(n, k) array."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.n == 0:
            return np.tile(self.comps, (pts.shape[0], 1))
        return _eval_many(self.comps, pts)

    def __repr__(self):
        return f"PolyForm(n={self.n}, k={self.k}, degree<={self.total_degree()})"


def evaluate_on_vectors(values, vectors):
    """omega(v_1, ..., v_k) from component values (N x C(n,k)) and vectors (N x k x n)."""
    values = np.asarray(values)
    vectors = np.asarray(vectors)
    N, k, n = vectors.shape
    if k == 0:
        return values[:, 0]
    out = np.zeros(N)
    for j, I in enumerate(basis(n, k)):
        out += values[:, j] * np.linalg.det(vectors[:, :, list(I)])
    return out
