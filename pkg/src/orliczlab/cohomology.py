"""Kernels, images and cohomology of finite-dimensional cochain complexes."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import InvalidComplexError, InvalidParameterError
from .simplicial import SimplicialComplex

RANK_CUTOFF = 1e-9


def _dense(M):
    return M.toarray() if sp.issparse(M) else np.asarray(M)


def numeric_rank(M, cutoff: float = RANK_CUTOFF) -> int:
    M = _dense(M).astype(float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > cutoff * s[0])) if s[0] > 0 else 0


def exact_rank(M) -> int:
    """Rank over the rationals of an integer matrix."""
    from sympy import QQ
    from sympy.polys.matrices import DomainMatrix

    M = _dense(M)
    if M.size == 0:
        return 0
    if not np.array_equal(M, np.round(M)):
        raise InvalidParameterError("exact rank needs an integer matrix")
    rows = [[int(x) for x in row] for row in M]
    return DomainMatrix.from_list(rows, QQ).rank()


@dataclass
class LinearComplex:
    """Spaces of dimension dims[k] and maps D_k: C^k -> C^{k+1}."""

    dims: list
    maps: list = field(default_factory=list)
    exact: bool = False

    def __post_init__(self):
        self.dims = [int(d) for d in self.dims]
        if len(self.maps) != max(len(self.dims) - 1, 0):
            raise InvalidComplexError("need one map between each pair of consecutive spaces")
        for k, D in enumerate(self.maps):
            if D.shape != (self.dims[k + 1], self.dims[k]):
                raise InvalidComplexError(f"map {k} has shape {D.shape}, expected {(self.dims[k + 1], self.dims[k])}")
        for k in range(len(self.maps) - 1):
            comp = self.maps[k + 1] @ self.maps[k]
            if self.exact:
                bad = sp.csr_matrix(comp).count_nonzero() if sp.issparse(comp) else np.count_nonzero(comp)
                if bad:
                    raise InvalidComplexError(f"D_{k + 1} D_{k} != 0")
            else:
                comp = _dense(comp)
                if comp.size and np.max(np.abs(comp)) > 1e-10 * max(1.0, _scale(self.maps[k], self.maps[k + 1])):
                    raise InvalidComplexError(f"D_{k + 1} D_{k} != 0")

    @classmethod
    def from_simplicial(cls, X: SimplicialComplex) -> "LinearComplex":
        dims = [X.count(k) for k in range(X.dimension + 1)]
        maps = [X.coboundary_matrix(k) for k in range(X.dimension)]
        return cls(dims, maps, exact=True)

    def map(self, k: int):
        """D_k, with zero maps outside the stored range."""
        if 0 <= k < len(self.maps):
            return self.maps[k]
        rows = self.dims[k + 1] if 0 <= k + 1 < len(self.dims) else 0
        cols = self.dims[k] if 0 <= k < len(self.dims) else 0
        return np.zeros((rows, cols))

    def rank(self, k: int, exact: bool | None = None) -> int:
        D = self.map(k)
        if (self.exact if exact is None else exact):
            return exact_rank(D)
        return numeric_rank(D)


def _scale(*mats):
    return max((float(np.max(np.abs(_dense(M)))) if M.shape[0] * M.shape[1] else 0.0) for M in mats)


def cohomology_dim(cx: LinearComplex, k: int, exact: bool | None = None) -> int:
    """dim Ker D_k - rank D_{k-1}."""
    if not 0 <= k < len(cx.dims):
        raise InvalidParameterError(f"degree {k} outside 0..{len(cx.dims) - 1}")
    return cx.dims[k] - cx.rank(k, exact) - cx.rank(k - 1, exact)


def betti_numbers(cx: LinearComplex, exact: bool | None = None) -> list[int]:
    return [cohomology_dim(cx, k, exact) for k in range(len(cx.dims))]


def harmonic_basis(cx: LinearComplex, k: int) -> np.ndarray:
    """Orthonormal basis (columns) of Ker D_k intersected with (Im D_{k-1})^perp."""
    Dk = _dense(cx.map(k)).astype(float)
    Dprev = _dense(cx.map(k - 1)).astype(float)
    stacked = np.vstack([Dk, Dprev.T]) if Dk.size or Dprev.size else np.zeros((0, cx.dims[k]))
    if stacked.shape[0] == 0:
        return np.eye(cx.dims[k])
    return sla.null_space(stacked, rcond=RANK_CUTOFF)


def harmonic_representative(cx: LinearComplex, k: int, index: int) -> np.ndarray:
    H = harmonic_basis(cx, k)
    if not 0 <= index < H.shape[1]:
        raise InvalidParameterError(f"index {index} out of range for {H.shape[1]} classes")
    return H[:, index]


def reduced_equals_unreduced(cx: LinearComplex, k: int) -> bool:
    """Images of linear maps between finite-dimensional spaces are closed."""
    return True


def cocycle_basis(cx: LinearComplex, k: int) -> np.ndarray:
    """Orthonormal basis (columns) of Ker D_k."""
    Dk = _dense(cx.map(k)).astype(float)
    if Dk.shape[0] == 0:
        return np.eye(cx.dims[k])
    return sla.null_space(Dk, rcond=RANK_CUTOFF)


def pairing_matrix(cochains: np.ndarray, reps: np.ndarray) -> np.ndarray:
    """Euclidean pairings of cochains (columns) with representatives (columns)."""
    return np.asarray(cochains).T @ np.asarray(reps)
