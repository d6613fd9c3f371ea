"""Finite oriented simplicial complexes, cochains and the coboundary.

Simplices are stored as ascending vertex tuples; that ordering is the
canonical orientation. Face signs follow the alternating convention
(-1)^i for the face that omits the i-th vertex.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, InvalidComplexError, InvalidParameterError, NotFoundError
from .orlicz import luxemburg_norm
from .young import YoungFunction


def permutation_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if an entry repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


class SimplicialComplex:
    """A finite simplicial complex on vertices 0..nv-1."""

    def __init__(self, simplices: dict, validate: bool = True):
        dims = sorted(int(k) for k in simplices)
        self.dimension = max(dims) if dims else -1
        self.simplices: list[list[tuple]] = []
        for k in range(self.dimension + 1):
            raw = [tuple(sorted(int(v) for v in s)) for s in simplices.get(k, simplices.get(str(k), []))]
            for s in raw:
                if len(s) != k + 1 or len(set(s)) != k + 1:
                    raise InvalidComplexError(f"malformed {k}-simplex {s}")
            if len(set(raw)) != len(raw):
                raise InvalidComplexError(f"duplicate {k}-simplices")
            self.simplices.append(sorted(raw))
        self.index = [{s: i for i, s in enumerate(layer)} for layer in self.simplices]
        if validate:
            self.validate()

    @classmethod
    def from_top(cls, tops) -> "SimplicialComplex":
        """Closure of a list of simplices under taking faces."""
        layers: dict[int, set] = {}
        for t in tops:
            t = tuple(sorted(t))
            for r in range(1, len(t) + 1):
                layers.setdefault(r - 1, set()).update(itertools.combinations(t, r))
        return cls({k: sorted(v) for k, v in layers.items()}, validate=False)

    def validate(self):
        verts = [s[0] for s in self.simplices[0]] if self.simplices else []
        if verts != list(range(len(verts))):
            raise InvalidComplexError("vertices must be labelled 0..nv-1")
        for k in range(1, self.dimension + 1):
            for s in self.simplices[k]:
                for face, _ in self.boundary_faces(s):
                    if face not in self.index[k - 1]:
                        raise InvalidComplexError(f"face {face} of {s} is missing")

    @property
    def n_vertices(self) -> int:
        return len(self.simplices[0]) if self.simplices else 0

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k <= self.dimension else 0

    def find(self, simplex) -> tuple[int, int]:
        """Index of a (possibly permuted) simplex and the orientation sign."""
        s = tuple(simplex)
        k = len(s) - 1
        key = tuple(sorted(s))
        sign = permutation_sign(s)
        if sign == 0 or k > self.dimension or key not in self.index[k]:
            raise NotFoundError(f"{s} is not a simplex of the complex")
        return self.index[k][key], sign

    def boundary_faces(self, simplex) -> list[tuple[tuple, int]]:
        s = tuple(simplex)
        if len(s) < 2:
            raise InvalidParameterError("a 0-simplex has no boundary faces")
        k = len(s) - 1
        if k > self.dimension or tuple(sorted(s)) not in self.index[k]:
            raise NotFoundError(f"{s} is not a simplex of the complex")
        return [(s[:i] + s[i + 1 :], -1 if i % 2 else 1) for i in range(len(s))]

    def coboundary_matrix(self, k: int) -> sp.csr_matrix:
        """Integer matrix of delta: C^k -> C^{k+1}."""
        rows, cols, vals = [], [], []
        if 0 <= k < self.dimension:
            for r, s in enumerate(self.simplices[k + 1]):
                for face, sign in self.boundary_faces(s):
                    rows.append(r)
                    cols.append(self.index[k][face])
                    vals.append(sign)
        shape = (self.count(k + 1), self.count(k))
        return sp.csr_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=shape)

    @cached_property
    def tops_containing(self) -> list[list[list[int]]]:
        """tops_containing[k][i] lists the top simplices containing simplex (k, i)."""
        n = self.dimension
        out = [[[] for _ in layer] for layer in self.simplices]
        for t_idx, t in enumerate(self.simplices[n]):
            for r in range(1, n + 2):
                for face in itertools.combinations(t, r):
                    out[r - 1][self.index[r - 1][face]].append(t_idx)
        return out

    def is_pure(self) -> bool:
        return all(len(ts) > 0 for layer in self.tops_containing for ts in layer)

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * self.count(k) for k in range(self.dimension + 1))

    def to_json(self) -> dict:
        return {
            "vertices": list(range(self.n_vertices)),
            "simplices": {str(k): [list(s) for s in layer] for k, layer in enumerate(self.simplices)},
        }

    @classmethod
    def from_json(cls, data) -> "SimplicialComplex":
        if isinstance(data, str):
            data = json.loads(data)
        ids = list(data["vertices"])
        relabel = {v: i for i, v in enumerate(sorted(ids))}
        simplices = {}
        for k, layer in data["simplices"].items():
            try:
                simplices[int(k)] = [[relabel[v] for v in s] for s in layer]
            except KeyError as exc:
                raise InvalidComplexError(f"simplex uses unknown vertex {exc}") from None
        if 0 not in simplices:
            simplices[0] = [[i] for i in range(len(ids))]
        return cls(simplices, validate=True)

    def __repr__(self):
        counts = ",".join(str(self.count(k)) for k in range(self.dimension + 1))
        return f"SimplicialComplex(dim={self.dimension}, counts=({counts}))"


@dataclass
class Cochain:
    """Real values on the canonical k-simplices; alternating on permutations."""

    complex: SimplicialComplex
    degree: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.complex.count(self.degree),):
            raise DimensionMismatchError(
                f"{self.degree}-cochain needs {self.complex.count(self.degree)} values"
            )

    @classmethod
    def zeros(cls, X: SimplicialComplex, k: int) -> "Cochain":
        return cls(X, k, np.zeros(X.count(k)))

    @classmethod
    def indicator(cls, X, simplex) -> "Cochain":
        idx, sign = X.find(simplex)
        c = cls.zeros(X, len(simplex) - 1)
        c.values[idx] = sign
        return c

    def __call__(self, simplex) -> float:
        idx, sign = self.complex.find(simplex)
        return sign * float(self.values[idx])

    def _check(self, other):
        if other.complex is not self.complex or other.degree != self.degree:
            raise DimensionMismatchError("cochains live on different spaces")

    def __add__(self, other):
        self._check(other)
        return Cochain(self.complex, self.degree, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return Cochain(self.complex, self.degree, self.values - other.values)

    def __mul__(self, c):
        return Cochain(self.complex, self.degree, c * self.values)

    __rmul__ = __mul__


def coboundary(theta: Cochain) -> Cochain:
    X = theta.complex
    D = X.coboundary_matrix(theta.degree)
    return Cochain(X, theta.degree + 1, D @ theta.values)


def cochain_norm(phi: YoungFunction, theta: Cochain) -> float:
    """l^phi norm over the counting measure on X_k."""
    if theta.values.size == 0:
        return 0.0
    return float(luxemburg_norm(phi, theta.values))


@dataclass(frozen=True)
class GeometryStats:
    max_vertex_degree: int
    incidence_bound: int
    max_cofaces: tuple
    max_simplex_diameter: float | None = None


def geometry_stats(X: SimplicialComplex, coords=None) -> GeometryStats:
    """Vertex degree, simplices per vertex and per-dimension coface counts.

    ``coords`` (nv x d) adds the largest Euclidean simplex diameter.
    """
    deg = np.zeros(X.n_vertices, dtype=int)
    incid = np.zeros(X.n_vertices, dtype=int)
    for k, layer in enumerate(X.simplices):
        for s in layer:
            incid[list(s)] += 1
            if k == 1:
                deg[list(s)] += 1
    cof = []
    for k in range(X.dimension):
        D = X.coboundary_matrix(k)
        counts = np.diff(D.tocsc().indptr)
        cof.append(int(counts.max()) if counts.size else 0)
    diam = None
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        diam = 0.0
        for s in X.simplices[X.dimension]:
            P = coords[list(s)]
            diam = max(diam, float(np.max(np.linalg.norm(P[:, None] - P[None], axis=-1))))
    return GeometryStats(int(deg.max(initial=0)), int(incid.max(initial=0)), tuple(cof), diam)


def coboundary_norm_estimate(
    phi: YoungFunction, X: SimplicialComplex, k: int, trials: int = 100, seed: int = 0
) -> float:
    """Empirical lower bound on the operator norm of delta on l^phi(X_k).

    Candidates are Gaussian and random-sign cochains plus the adjoint images
    delta^T e_sigma, which saturate the bound on small complexes.
    """
    if trials < 1:
        raise InvalidParameterError("trials must be >= 1")
    if X.count(k + 1) == 0 or X.count(k) == 0:
        return 0.0
    D = X.coboundary_matrix(k).toarray().astype(float)
    rng = np.random.default_rng(seed)
    cands = [rng.standard_normal(X.count(k)) for _ in range(trials)]
    cands += [rng.choice([-1.0, 1.0], X.count(k)) for _ in range(trials)]
    cands += list(D[: min(trials, D.shape[0])])
    best = 0.0
    for c in cands:
        den = luxemburg_norm(phi, c)
        if den > 0:
            best = max(best, luxemburg_norm(phi, D @ c) / den)
    return float(best)


def barycentric_subdivision(X: SimplicialComplex) -> tuple[SimplicialComplex, list[tuple]]:
    """Combinatorial barycentric subdivision.

    Returns the new complex and, for each new vertex, the simplex of ``X`` it
    is the barycenter of.
    """
    old = [s for layer in X.simplices for s in layer]
    vid = {s: i for i, s in enumerate(old)}
    tops = []
    for t in X.simplices[X.dimension]:
        for perm in itertools.permutations(t):
            chain = [tuple(sorted(perm[: r + 1])) for r in range(len(perm))]
            tops.append(tuple(vid[c] for c in chain))
    return SimplicialComplex.from_top(tops), old
