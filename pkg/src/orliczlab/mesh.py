"""Triangulated manifolds of dimension <= 3 and piecewise-polynomial forms.

Each top simplex T = (v0 < v1 < ... < vn) carries local coordinates xi in the
reference simplex: v0 sits at the origin and vj at the j-th unit vector. All
forms are stored per top simplex in these coordinates; the metric enters
through the Gram matrix G = J^T J of the chart differential J.
"""
from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from scipy.spatial import Delaunay

from .errors import (
    DimensionMismatchError,
    InvalidComplexError,
    InvalidDegreeError,
    InvalidParameterError,
    SpecError,
    UnsupportedDimensionError,
)
from .orlicz import DiscreteMeasure, luxemburg, DEFAULT_TOL
from .polyforms import PolyForm, basis
from .quadrature import simplex_rule
from .simplicial import Cochain, SimplicialComplex, barycentric_subdivision
from .young import YoungFunction

GRAM_TOL = 1e-12
DEFAULT_ORDER = 4


class Mesh:
    """A simplicial complex with vertex coordinates and a flat metric.

    ``metric`` is ``"euclidean"`` (coordinates in R^d, d >= n) or ``"torus"``
    (coordinates in the box of side ``period``, each top simplex lifted to a
    fundamental-domain representative).
    """

    def __init__(self, complex: SimplicialComplex, coordinates, metric="euclidean", period=None, name=""):
        coords = np.asarray(coordinates, dtype=float)
        if coords.ndim != 2 or coords.shape[0] != complex.n_vertices:
            raise DimensionMismatchError("need one coordinate row per vertex")
        if complex.dimension > 3:
            raise UnsupportedDimensionError("meshes of dimension > 3 are not supported")
        if metric not in ("euclidean", "torus"):
            raise InvalidParameterError(f"unknown metric {metric!r}")
        if metric == "torus":
            if period is None:
                raise InvalidParameterError("torus metric needs a period")
            period = np.asarray(period, dtype=float)
            if period.shape != (coords.shape[1],) or not np.all(period > 0):
                raise InvalidParameterError("period must be positive, one entry per coordinate")
        self.complex = complex
        self.coordinates = coords
        self.metric = metric
        self.period = period
        self.name = name
        bad = np.flatnonzero(self.gram_det <= GRAM_TOL)
        if bad.size:
            raise InvalidComplexError(f"degenerate top simplex {complex.simplices[-1][bad[0]]}")

    # geometry -----------------------------------------------------------
    @property
    def dim(self) -> int:
        return self.complex.dimension

    @property
    def tops(self) -> list:
        return self.complex.simplices[self.dim]

    @property
    def n_tops(self) -> int:
        return len(self.tops)

    @cached_property
    def top_points(self) -> np.ndarray:
        """Vertex positions per top simplex (nT, n+1, d), lifted for the torus."""
        P = self.coordinates[np.array(self.tops)]
        if self.metric == "torus":
            rel = P - P[:, :1]
            rel -= self.period * np.round(rel / self.period)
            P = P[:, :1] + rel
        return P

    @cached_property
    def jacobians(self) -> np.ndarray:
        P = self.top_points
        return np.transpose(P[:, 1:] - P[:, :1], (0, 2, 1))

    @cached_property
    def gram(self) -> np.ndarray:
        J = self.jacobians
        return np.einsum("tdi,tdj->tij", J, J)

    @cached_property
    def gram_det(self) -> np.ndarray:
        return np.linalg.det(self.gram) if self.dim else np.ones(self.n_tops)

    @cached_property
    def gram_inv(self) -> np.ndarray:
        return np.linalg.inv(self.gram) if self.dim else np.zeros((self.n_tops, 0, 0))

    @cached_property
    def volumes(self) -> np.ndarray:
        return np.sqrt(self.gram_det) / math.factorial(self.dim)

    @property
    def total_volume(self) -> float:
        return float(np.sum(self.volumes))

    @cached_property
    def bilipschitz(self) -> float:
        """Largest over smallest singular value across all chart differentials."""
        if self.dim == 0:
            return 1.0
        s = np.linalg.svd(self.jacobians, compute_uv=False)
        return float(s.max() / s.min())

    @lru_cache(maxsize=None)
    def comass_matrix(self, k: int) -> np.ndarray:
        """Per-top matrices M with |omega|^2 = a^T M a for local components a."""
        B = basis(self.dim, k)
        Gi = self.gram_inv
        M = np.empty((self.n_tops, len(B), len(B)))
        for a, I in enumerate(B):
            for b, J in enumerate(B):
                M[:, a, b] = np.linalg.det(Gi[:, list(I)][:, :, list(J)]) if k else 1.0
        return M

    @lru_cache(maxsize=None)
    def faces_of_tops(self, k: int) -> np.ndarray:
        """Global indices of the k-faces of each top simplex, in local lexicographic order."""
        idx = self.complex.index[k]
        return np.array([[idx[f] for f in itertools.combinations(T, k + 1)] for T in self.tops], dtype=int)

    def local_coords(self, T: int, vertices) -> np.ndarray:
        """Reference coordinates of the given vertices of top simplex T."""
        top = self.tops[T]
        out = np.zeros((len(vertices), self.dim))
        for r, v in enumerate(vertices):
            j = top.index(v)
            if j:
                out[r, j - 1] = 1.0
        return out

    def point(self, T: int, bary) -> np.ndarray:
        return np.asarray(bary, dtype=float) @ self.top_points[T]

    def stats(self) -> dict:
        return {
            "dimension": self.dim,
            "counts": [self.complex.count(k) for k in range(self.dim + 1)],
            "total_volume": self.total_volume,
            "volume_range": [float(self.volumes.min()), float(self.volumes.max())],
            "bilipschitz": self.bilipschitz,
        }

    # serialization ------------------------------------------------------
    def to_json(self) -> dict:
        out = self.complex.to_json()
        out["coordinates"] = self.coordinates.tolist()
        out["metric"] = self.metric
        if self.period is not None:
            out["period"] = self.period.tolist()
        return out

    @classmethod
    def from_json(cls, data, name="") -> "Mesh":
        if isinstance(data, str):
            data = json.loads(data)
        X = SimplicialComplex.from_json(data)
        order = np.argsort(np.asarray(data["vertices"]))
        coords = np.asarray(data["coordinates"], dtype=float)[order]
        return cls(X, coords, data.get("metric", "euclidean"), data.get("period"), name)

    def __repr__(self):
        return f"Mesh({self.name or 'custom'}, dim={self.dim}, tops={self.n_tops})"


# --------------------------------------------------------------------------
# generators


def interval(n: int = 8) -> Mesh:
    X = SimplicialComplex.from_top([(i, i + 1) for i in range(n)])
    return Mesh(X, np.linspace(0, 1, n + 1)[:, None], name=f"interval:n={n}")


def circle(n: int = 12) -> Mesh:
    if n < 3:
        raise InvalidParameterError("a circle needs n >= 3")
    X = SimplicialComplex.from_top([(i, (i + 1) % n) for i in range(n)])
    th = 2 * np.pi * np.arange(n) / n
    return Mesh(X, np.stack([np.cos(th), np.sin(th)], axis=1), name=f"circle:n={n}")


def torus(m: int = 8) -> Mesh:
    """Flat unit torus from an m x m grid, each square cut along its diagonal."""
    if m < 3:
        raise InvalidParameterError("a torus needs m >= 3")
    vid = lambda i, j: (i % m) * m + (j % m)  # noqa: E731
    tops = []
    for i in range(m):
        for j in range(m):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)
            tops += [(a, b, d), (a, c, d)]
    X = SimplicialComplex.from_top(tops)
    ii, jj = np.divmod(np.arange(m * m), m)
    coords = np.stack([ii / m, jj / m], axis=1)
    return Mesh(X, coords, "torus", [1.0, 1.0], name=f"torus:m={m}")


def octahedron() -> Mesh:
    coords = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], float)
    tops = [(a, b, c) for a in (0, 1) for b in (2, 3) for c in (4, 5)]
    return Mesh(SimplicialComplex.from_top(tops), coords, name="sphere:oct")


def icosahedron() -> Mesh:
    g = (1 + math.sqrt(5)) / 2
    pts = []
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            pts += [(0, s1, s2 * g), (s1, s2 * g, 0), (s2 * g, 0, s1)]
    coords = np.array(pts, float)
    D = np.linalg.norm(coords[:, None] - coords[None], axis=-1)
    tops = [t for t in itertools.combinations(range(12), 3) if all(abs(D[a, b] - 2) < 1e-9 for a, b in itertools.combinations(t, 2))]
    coords /= np.linalg.norm(coords, axis=1, keepdims=True)
    return Mesh(SimplicialComplex.from_top(tops), coords, name="sphere:icosa")


def disk(h: float = 0.2) -> Mesh:
    """Unit disk from concentric rings of spacing about h, Delaunay triangulated."""
    if not 0 < h <= 1:
        raise InvalidParameterError("disk spacing must lie in (0, 1]")
    rings = max(1, round(1 / h))
    pts = [np.zeros(2)]
    for j in range(1, rings + 1):
        r = j / rings
        cnt = max(6, round(2 * np.pi * r / h))
        th = 2 * np.pi * (np.arange(cnt) + 0.5 * (j % 2)) / cnt
        pts.append(np.stack([r * np.cos(th), r * np.sin(th)], axis=1))
    coords = np.vstack([p.reshape(-1, 2) for p in pts])
    tri = Delaunay(coords).simplices
    P = coords[tri]
    u, v = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
    area = 0.5 * np.abs(u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0])
    tops = [tuple(t) for t in tri[area > 1e-10]]
    return Mesh(SimplicialComplex.from_top(tops), coords, name=f"ball2:h={h:g}")


def cube(m: int = 2) -> Mesh:
    """Unit cube, m^3 cells, each split into six tetrahedra around its diagonal."""
    if m < 1:
        raise InvalidParameterError("cube needs m >= 1")
    vid = lambda i, j, k: (i * (m + 1) + j) * (m + 1) + k  # noqa: E731
    tops = []
    for cell in itertools.product(range(m), repeat=3):
        for perm in itertools.permutations(range(3)):
            cur = list(cell)
            tet = [vid(*cur)]
            for ax in perm:
                cur[ax] += 1
                tet.append(vid(*cur))
            tops.append(tuple(tet))
    g = np.arange(m + 1) / m
    coords = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    return Mesh(SimplicialComplex.from_top(tops), coords, name=f"cube:m={m}")


def midpoint_subdivision(mesh: Mesh) -> Mesh:
    """Split every triangle into four through its edge midpoints."""
    if mesh.dim != 2 or mesh.metric != "euclidean":
        raise UnsupportedDimensionError("midpoint subdivision needs a Euclidean triangle mesh")
    X = mesh.complex
    nv = X.n_vertices
    mid = {e: nv + i for i, e in enumerate(X.simplices[1])}
    coords = np.vstack([mesh.coordinates, [mesh.coordinates[list(e)].mean(axis=0) for e in X.simplices[1]]])
    tops = []
    for a, b, c in X.simplices[2]:
        ab, ac, bc = mid[(a, b)], mid[(a, c)], mid[(b, c)]
        tops += [(a, ab, ac), (b, ab, bc), (c, ac, bc), (ab, ac, bc)]
    return Mesh(SimplicialComplex.from_top(tops), coords, name=mesh.name)


def barycentric_refinement(mesh: Mesh, times: int = 1) -> Mesh:
    for _ in range(times):
        Y, cells = barycentric_subdivision(mesh.complex)
        coords = np.empty((Y.n_vertices, mesh.coordinates.shape[1]))
        for i, s in enumerate(cells):
            P = mesh.coordinates[list(s)]
            if mesh.metric == "torus":
                rel = P - P[:1]
                P = P[:1] + rel - mesh.period * np.round(rel / mesh.period)
            coords[i] = P.mean(axis=0)
        if mesh.metric == "torus":
            coords = np.mod(coords, mesh.period)
        mesh = Mesh(Y, coords, mesh.metric, mesh.period, mesh.name)
    return mesh


def _params(text):
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise SpecError(f"not a number: {value!r}") from None
    return out


def load_mesh(spec: str, refine: int = 0) -> Mesh:
    """Build a mesh from a generator name (``circle:n=12``, ``torus:m=8``,
    ``sphere:oct``, ``sphere:icosa``, ``ball2:h=0.2``, ``interval:n=8``,
    ``cube:m=2``, optionally prefixed ``bary:k=1,inner=...``) or a JSON file.

    ``refine`` doubles the resolution that many times.
    """
    if refine < 0:
        raise SpecError("refine must be >= 0")
    spec = spec.strip()
    if spec.endswith(".json") or os.path.sep in spec:
        try:
            with open(spec) as fh:
                mesh = Mesh.from_json(json.load(fh), name=os.path.basename(spec))
        except OSError as exc:
            raise SpecError(f"cannot read mesh file {spec!r}: {exc}") from None
        for _ in range(refine):
            mesh = barycentric_refinement(mesh) if mesh.dim != 2 or mesh.metric != "euclidean" else midpoint_subdivision(mesh)
        return mesh
    name, _, rest = spec.partition(":")
    if name == "bary":
        head, sep, inner = rest.partition("inner=")
        if not sep:
            raise SpecError(f"bary needs inner=...: {spec!r}")
        times = int(_params(head.rstrip(",")).get("k", 1))
        return barycentric_refinement(load_mesh(inner, refine), times)
    try:
        if name == "sphere":
            if rest not in ("oct", "icosa"):
                raise SpecError(f"unknown sphere {rest!r}")
            mesh = octahedron() if rest == "oct" else icosahedron()
            for _ in range(refine):
                mesh = midpoint_subdivision(mesh)
            mesh.name = spec if not refine else f"{spec}@{refine}"
            return mesh
        kw = _params(rest)
        f = 2**refine
        if name == "circle":
            return circle(int(kw.get("n", 12)) * f)
        if name == "interval":
            return interval(int(kw.get("n", 8)) * f)
        if name == "torus":
            return torus(int(kw.get("m", 8)) * f)
        if name == "ball2":
            return disk(kw.get("h", 0.2) / f)
        if name == "cube":
            return cube(int(kw.get("m", 2)) * f)
    except InvalidParameterError as exc:
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown mesh {spec!r}")


# --------------------------------------------------------------------------
# forms


@lru_cache(maxsize=None)
def _barycentric(n):
    """Barycentric coordinates as affine 0-forms and their constant gradients."""
    lam, grads = [], []
    for j in range(n + 1):
        g = np.zeros(n)
        if j == 0:
            g[:] = -1.0
            lam.append(PolyForm.affine(n, 1.0, g))
        else:
            g[j - 1] = 1.0
            lam.append(PolyForm.affine(n, 0.0, g))
        grads.append(g)
    return tuple(lam), np.array(grads)


def barycentric_forms(n: int):
    """(lambda_0..lambda_n as 0-forms, their gradients as rows) on the reference simplex."""
    return _barycentric(n)


@lru_cache(maxsize=None)
def whitney_local(n: int, face: tuple) -> PolyForm:
    """Whitney form of a face (local vertex indices) of the reference n-simplex."""
    lam, grads = _barycentric(n)
    k = len(face) - 1
    out = PolyForm.zeros(n, k, 2)
    for j, v in enumerate(face):
        rest = face[:j] + face[j + 1 :]
        const = PolyForm.wedge_of_covectors(grads[list(rest)]) if rest else PolyForm.constant(n, 0, [1.0])
        out = out + _times_const(lam[v], const) * ((-1) ** j)
    return out * math.factorial(k)


def _times_const(scalar: PolyForm, const: PolyForm) -> PolyForm:
    """scalar polynomial times a constant form."""
    n = scalar.n
    vals = const.comps[(slice(None),) + (0,) * n]
    return PolyForm(n, const.k, vals.reshape((-1,) + (1,) * n) * scalar.comps[0][None])


class _FormBase:
    mesh: Mesh
    degree: int

    def piece(self, T: int) -> PolyForm:  # pragma: no cover - abstract
        raise NotImplementedError

    def pieces(self) -> list:
        return [self.piece(T) for T in range(self.mesh.n_tops)]

    def nodal_values(self, points) -> np.ndarray:
        """Local component values at reference points, shape (nT, Q, ncomp)."""
        return np.stack([p(points) for p in self.pieces()])

    def polynomial_degree(self) -> int:
        return max((p.total_degree() for p in self.pieces()), default=0)


class MeshForm(_FormBase):
    """Whitney form sum_F c_F w_F with one coefficient per canonical k-simplex."""

    def __init__(self, mesh: Mesh, degree: int, coefficients):
        if not 0 <= degree <= mesh.dim:
            raise InvalidDegreeError(f"degree {degree} outside 0..{mesh.dim}")
        c = np.asarray(coefficients, dtype=float)
        if c.shape != (mesh.complex.count(degree),):
            raise DimensionMismatchError(f"need {mesh.complex.count(degree)} coefficients")
        self.mesh, self.degree, self.coefficients = mesh, degree, c

    def piece(self, T: int) -> PolyForm:
        n, k = self.mesh.dim, self.degree
        out = PolyForm.zeros(n, k, 2)
        faces = self.mesh.faces_of_tops(k)[T]
        for f_loc, g in zip(itertools.combinations(range(n + 1), k + 1), faces):
            out = out + whitney_local(n, f_loc) * self.coefficients[g]
        return out

    def nodal_values(self, points) -> np.ndarray:
        n, k = self.mesh.dim, self.degree
        B = np.stack([whitney_local(n, f)(points) for f in itertools.combinations(range(n + 1), k + 1)])
        C = self.coefficients[self.mesh.faces_of_tops(k)]
        return np.einsum("tf,fqc->tqc", C, B)

    def polynomial_degree(self) -> int:
        return 1 if self.degree < self.mesh.dim else 0

    def __add__(self, other):
        return MeshForm(self.mesh, self.degree, self.coefficients + other.coefficients)

    def __mul__(self, c):
        return MeshForm(self.mesh, self.degree, c * self.coefficients)

    __rmul__ = __mul__

    def __repr__(self):
        return f"MeshForm(degree={self.degree}, {self.coefficients.size} coefficients)"


class PiecewiseForm(_FormBase):
    """Arbitrary polynomial form given per top simplex in local coordinates."""

    def __init__(self, mesh: Mesh, degree: int, pieces):
        pieces = list(pieces)
        if len(pieces) != mesh.n_tops:
            raise DimensionMismatchError("need one piece per top simplex")
        if any(p.k != degree or p.n != mesh.dim for p in pieces):
            raise InvalidDegreeError("piece degree mismatch")
        self.mesh, self.degree, self._pieces = mesh, degree, pieces

    def piece(self, T: int) -> PolyForm:
        return self._pieces[T]

    def pieces(self) -> list:
        return list(self._pieces)

    def __add__(self, other):
        return PiecewiseForm(self.mesh, self.degree, [a + b for a, b in zip(self.pieces(), other.pieces())])

    def __mul__(self, c):
        return PiecewiseForm(self.mesh, self.degree, [p * c for p in self._pieces])

    __rmul__ = __mul__


def whitney_interpolate(mesh: Mesh, theta: Cochain) -> MeshForm:
    if theta.complex is not mesh.complex and theta.complex.simplices != mesh.complex.simplices:
        raise DimensionMismatchError("cochain lives on a different complex")
    if theta.degree > mesh.dim:
        raise InvalidDegreeError(f"degree {theta.degree} exceeds mesh dimension {mesh.dim}")
    return MeshForm(mesh, theta.degree, theta.values)


def exterior_derivative(omega):
    if omega.degree >= omega.mesh.dim:
        raise InvalidDegreeError("exterior derivative of a top-degree form")
    if isinstance(omega, MeshForm):
        D = omega.mesh.complex.coboundary_matrix(omega.degree)
        return MeshForm(omega.mesh, omega.degree + 1, D @ omega.coefficients)
    return PiecewiseForm(omega.mesh, omega.degree + 1, [p.d() for p in omega.pieces()])


def constant_form(mesh: Mesh, degree: int, ambient) -> PiecewiseForm:
    """Pullback of a constant ambient k-form (components in lexicographic order of R^d)."""
    d = mesh.coordinates.shape[1]
    ambient = np.asarray(ambient, dtype=float)
    Bd = basis(d, degree)
    if ambient.shape != (len(Bd),):
        raise DimensionMismatchError(f"need {len(Bd)} ambient components")
    n = mesh.dim
    pieces = []
    for J in mesh.jacobians:
        vals = []
        for I in basis(n, degree):
            # omega(J e_I) = sum_A a_A det(J[A, I])
            vals.append(sum(a * (np.linalg.det(J[np.ix_(A, I)]) if degree else 1.0) for a, A in zip(ambient, Bd)))
        pieces.append(PolyForm.constant(n, degree, vals))
    return PiecewiseForm(mesh, degree, pieces)


def pointwise_norms(mesh: Mesh, values: np.ndarray, degree: int) -> np.ndarray:
    """Comass of local component values (nT, Q, ncomp) -> (nT, Q)."""
    if mesh.dim > 3:
        raise UnsupportedDimensionError("comass is only implemented for n <= 3")
    M = mesh.comass_matrix(degree)
    # rescale so the quadratic form neither underflows nor overflows
    big = float(np.max(np.abs(values), initial=0.0))
    if big == 0.0 or not np.isfinite(big):
        big = 1.0
    v = values / big
    sq = np.einsum("tqa,tab,tqb->tq", v, M, v)
    return big * np.sqrt(np.maximum(sq, 0.0))


def pointwise_norm(mesh: Mesh, omega, T: int, bary) -> float:
    """|omega|_x at the point of top simplex T with barycentric coordinates ``bary``."""
    bary = np.asarray(bary, dtype=float)
    if bary.shape != (mesh.dim + 1,):
        raise DimensionMismatchError("barycentric coordinates need n+1 entries")
    vals = omega.piece(T)(bary[None, 1:])
    big = float(np.max(np.abs(vals), initial=0.0)) or 1.0
    v = vals[0] / big
    return big * float(np.sqrt(max(v @ mesh.comass_matrix(omega.degree)[T] @ v, 0.0)))


@dataclass(frozen=True)
class MeshQuadrature:
    """Reference nodes shared by every top simplex and per-top weights."""

    points: np.ndarray  # (Q, n) reference coordinates
    weights: np.ndarray  # (nT, Q), rows sum to the simplex volumes
    order: int

    @property
    def barycentric(self) -> np.ndarray:
        return np.hstack([1 - self.points.sum(axis=1, keepdims=True), self.points])

    @property
    def measure(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.weights.ravel())


def mesh_quadrature(mesh: Mesh, order: int = DEFAULT_ORDER) -> MeshQuadrature:
    rule = simplex_rule(mesh.dim, order)
    w = np.sqrt(mesh.gram_det)[:, None] * rule.weights[None]
    return MeshQuadrature(rule.points, w, order)


def lphi_modular(phi: YoungFunction, mesh: Mesh, omega, alpha: float, quad: MeshQuadrature | None = None) -> float:
    quad = quad or mesh_quadrature(mesh)
    vals = pointwise_norms(mesh, omega.nodal_values(quad.points), omega.degree)
    return float(np.sum(quad.weights * phi(vals / alpha)))


def lphi_norm(phi: YoungFunction, mesh: Mesh, omega, quad: MeshQuadrature | None = None, tol: float = DEFAULT_TOL) -> float:
    """Luxemburg norm of x -> |omega|_x with respect to the volume."""
    quad = quad or mesh_quadrature(mesh)
    vals = pointwise_norms(mesh, omega.nodal_values(quad.points), omega.degree)
    return float(luxemburg(phi, vals.ravel(), quad.measure, tol).norm)


def graph_norm(phi: YoungFunction, mesh: Mesh, omega, quad: MeshQuadrature | None = None, tol: float = DEFAULT_TOL) -> float:
    """||omega||_phi + ||d omega||_phi (the second term is absent in top degree)."""
    out = lphi_norm(phi, mesh, omega, quad, tol)
    if omega.degree < mesh.dim:
        out += lphi_norm(phi, mesh, exterior_derivative(omega), quad, tol)
    return out


def integrate_form(mesh: Mesh, omega, simplex, order: int | None = None) -> float:
    """Integral of omega over an oriented k-simplex (vertex tuple or canonical index)."""
    X = mesh.complex
    k = omega.degree
    if isinstance(simplex, (int, np.integer)):
        verts, sign = X.simplices[k][int(simplex)], 1
    else:
        if len(simplex) != k + 1:
            raise InvalidDegreeError(f"cannot integrate a {k}-form over a {len(simplex) - 1}-simplex")
        idx, sign = X.find(simplex)
        verts = X.simplices[k][idx]
    T = X.tops_containing[k][X.index[k][verts]][0]
    piece = omega.piece(T)
    V = mesh.local_coords(T, verts)
    if k == 0:
        return sign * float(piece(V)[0, 0])
    E = V[1:] - V[0]
    rule = simplex_rule(k, order if order is not None else piece.total_degree() + 1)
    pts = V[0] + rule.points @ E
    vals = piece(pts)
    minors = np.array([np.linalg.det(E[:, list(I)]) for I in basis(mesh.dim, k)])
    return sign * float(rule.weights @ (vals @ minors))


def derham_map(mesh: Mesh, omega) -> Cochain:
    X = mesh.complex
    k = omega.degree
    return Cochain(X, k, np.array([integrate_form(mesh, omega, i) for i in range(X.count(k))]))
