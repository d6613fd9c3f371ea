"""Quadrature rules on reference simplices and on Euclidean balls.

Simplex rules are conical products of Gauss-Jacobi rules on the collapsed
cube: every weight is positive and a rule with q points per axis integrates
polynomials of total degree 2q - 1 exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import InvalidParameterError, UnsupportedDimensionError


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray  # (Q, n)
    weights: np.ndarray  # (Q,)
    order: int

    def __len__(self):
        return self.weights.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def _gauss_jacobi01(q, a):
    """Nodes/weights on [0, 1] for the weight (1 - u)^a."""
    x, w = roots_jacobi(q, a, 0) if a else roots_legendre(q)
    return (x + 1) / 2, w / 2 ** (a + 1)


@lru_cache(maxsize=None)
def simplex_rule(n: int, order: int) -> QuadratureRule:
    """Rule on {x_i >= 0, sum x_i <= 1} exact for total degree <= order."""
    if order < 0:
        raise InvalidParameterError("order must be >= 0")
    if n == 0:
        return QuadratureRule(np.zeros((1, 0)), np.ones(1), order)
    if n > 3:
        raise UnsupportedDimensionError("simplex quadrature supports n <= 3")
    q = max(1, math.ceil((order + 1) / 2))
    axes = [_gauss_jacobi01(q, n - 1 - i) for i in range(n)]
    grids = np.meshgrid(*[u for u, _ in axes], indexing="ij")
    wgrid = np.meshgrid(*[w for _, w in axes], indexing="ij")
    U = np.stack([g.ravel() for g in grids], axis=1)
    W = np.prod(np.stack([g.ravel() for g in wgrid], axis=1), axis=1)
    # collapse: x_i = u_i * prod_{j<i} (1 - u_j)
    X = np.empty_like(U)
    rest = np.ones(U.shape[0])
    for i in range(n):
        X[:, i] = U[:, i] * rest
        rest = rest * (1 - U[:, i])
    X.setflags(write=False)
    W.setflags(write=False)
    return QuadratureRule(X, W, order)


def monomial_integral(alpha) -> float:
    """Exact integral of x^alpha over the reference simplex."""
    alpha = [int(a) for a in alpha]
    num = math.prod(math.factorial(a) for a in alpha)
    return num / math.factorial(sum(alpha) + len(alpha))


@lru_cache(maxsize=None)
def ball_rule(n: int, radius: float = 1.0, n_radial: int = 8, n_angular: int = 16) -> QuadratureRule:
    """Product rule on the centred ball of R^n; weights sum to its volume.

    Radial nodes use Gauss-Jacobi with the r^(n-1) Jacobian, angles are
    uniform (2D) or Gauss-Legendre in cos(theta) times uniform azimuth (3D).
    """
    if radius <= 0 or n_radial < 1 or n_angular < 1:
        raise InvalidParameterError("ball rule needs radius > 0 and positive node counts")
    if n == 1:
        x, w = roots_legendre(n_radial)
        return QuadratureRule(radius * x[:, None], radius * w, 2 * n_radial - 1)
    if n not in (2, 3):
        raise UnsupportedDimensionError("ball rules support n <= 3")
    x, w = roots_jacobi(n_radial, 0, n - 1)
    r = radius * (x + 1) / 2
    wr = w * (radius / 2) ** n
    if n == 2:
        th = 2 * np.pi * np.arange(n_angular) / n_angular
        wt = np.full(n_angular, 2 * np.pi / n_angular)
        dirs = np.stack([np.cos(th), np.sin(th)], axis=1)
    else:
        n_pol = max(1, n_angular // 2)
        c, wc = roots_legendre(n_pol)
        ph = 2 * np.pi * np.arange(n_angular) / n_angular
        C, PH = np.meshgrid(c, ph, indexing="ij")
        S = np.sqrt(1 - C**2)
        dirs = np.stack([S * np.cos(PH), S * np.sin(PH), C], axis=-1).reshape(-1, 3)
        wt = np.repeat(wc, n_angular) * (2 * np.pi / n_angular)
    pts = (r[:, None, None] * dirs[None]).reshape(-1, n)
    wts = (wr[:, None] * wt[None]).ravel()
    return QuadratureRule(pts, wts, 2 * n_radial - 1)


def ball_volume(n: int, radius: float = 1.0) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * radius**n
