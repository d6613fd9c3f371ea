"""The Cech-de Rham bicomplex over the open-star cover of a mesh.

An element of bidegree (k, m) assigns to every m-simplex D a k-form on the
open star U_D, the union of the top simplices containing D. Each component is
stored exactly: one polynomial form per top simplex of U_D, in that simplex's
reference coordinates. Restriction to a smaller star is selection of pieces.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimensionMismatchError,
    InvalidDegreeError,
    NotACocycleError,
    NotInKernelError,
    NumericalBreakdownError,
)
from .mesh import Mesh, MeshQuadrature, PiecewiseForm, barycentric_forms, mesh_quadrature, whitney_local
from .orlicz import DEFAULT_TOL, DiscreteMeasure, luxemburg
from .polyforms import PolyForm
from .quadrature import ball_rule
from .simplicial import Cochain
from .young import YoungFunction

CLOSED_TOL = 1e-9
BREAKDOWN_TOL = 1e-6


class StarCover:
    """Open stars U_D of a mesh and the averaging sets used by the row homotopy.

    For an m-simplex D the averaging set is the m-dimensional ball of radius
    r_D (half the inradius of D) about its barycenter, inside D itself; for a
    vertex it is the vertex. Since D lies in every top simplex of U_D, each
    segment from the averaging set to a point of U_D stays in one top simplex.
    """

    def __init__(self, mesh: Mesh, n_radial: int = 2, n_angular: int = 4):
        self.mesh = mesh
        self.complex = mesh.complex
        self.n_radial, self.n_angular = n_radial, n_angular

    @property
    def dim(self):
        return self.mesh.dim

    def star(self, m: int, i: int) -> list:
        """Top simplices containing simplex (m, i)."""
        return self.complex.tops_containing[m][i]

    def star_volume(self, m: int, i: int) -> float:
        return float(self.mesh.volumes[self.star(m, i)].sum())

    def star_volumes(self, m: int) -> np.ndarray:
        return np.array([self.star_volume(m, i) for i in range(self.complex.count(m))])

    def _simplex_points(self, m, i):
        """Physical vertex positions of simplex (m, i) in the chart of its first star top."""
        T = self.star(m, i)[0]
        top = self.mesh.tops[T]
        loc = [top.index(v) for v in self.complex.simplices[m][i]]
        return self.mesh.top_points[T][loc]

    def radius(self, m: int, i: int) -> float:
        """Half the inradius of the simplex (zero for a vertex)."""
        if m == 0:
            return 0.0
        P = self._simplex_points(m, i)
        vol = _simplex_volume(P)
        faces = sum(_simplex_volume(P[list(f)]) for f in itertools.combinations(range(m + 1), m))
        return 0.5 * m * vol / faces

    def averaging(self, m: int, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Barycentric coordinates (relative to the simplex) and probability weights."""
        key = (m, i)
        cache = self.__dict__.setdefault("_avg", {})
        if key in cache:
            return cache[key]
        if m == 0:
            out = (np.ones((1, 1)), np.ones(1))
        else:
            P = self._simplex_points(m, i)
            E = P[1:] - P[0]
            Q, _ = np.linalg.qr(E.T)  # orthonormal frame of the simplex plane
            rule = ball_rule(m, self.radius(m, i), self.n_radial, self.n_angular)
            pts = P.mean(axis=0) + rule.points @ Q.T
            c = np.linalg.solve(E @ E.T, E @ (pts - P[0]).T).T
            bary = np.hstack([1 - c.sum(axis=1, keepdims=True), c])
            out = (bary, rule.weights / rule.weights.sum())
        cache[key] = out
        return out

    def centers_in(self, m: int, i: int, T: int) -> tuple[np.ndarray, np.ndarray]:
        """Averaging points in the reference coordinates of top simplex T."""
        bary, w = self.averaging(m, i)
        return bary @ self.mesh.local_coords(T, self.complex.simplices[m][i]), w

    def check_star_shaped(self, samples: int = 5, seed: int = 0) -> bool:
        """Segments from averaging points to sampled points of U_D stay in one top simplex."""
        rng = np.random.default_rng(seed)
        for m in range(self.dim + 1):
            for i in range(self.complex.count(m)):
                for T in self.star(m, i):
                    X, _ = self.centers_in(m, i, T)
                    Y = rng.dirichlet(np.ones(self.dim + 1), samples)[:, 1:]
                    t = np.linspace(0, 1, 7)[:, None, None, None]
                    seg = X[None, :, None] + t * (Y[None, None] - X[None, :, None])
                    lam0 = 1 - seg.sum(axis=-1)
                    if seg.min() < -1e-12 or lam0.min() < -1e-12:
                        return False
        return True

    def check_averaging_inside(self) -> bool:
        """Every averaging point lies in its simplex (so in the closure of its star)."""
        return all(
            self.averaging(m, i)[0].min() >= -1e-12
            for m in range(self.dim + 1)
            for i in range(self.complex.count(m))
        )


def _simplex_volume(P):
    E = P[1:] - P[0]
    if E.shape[0] == 0:
        return 1.0
    return math.sqrt(max(np.linalg.det(E @ E.T), 0.0)) / math.factorial(E.shape[0])


@dataclass
class PartitionOfUnity:
    """Hat functions eta_v = lambda_v, affine on each top simplex."""

    mesh: Mesh

    def piece(self, T: int, v: int) -> PolyForm:
        top = self.mesh.tops[T]
        if v not in top:
            return PolyForm.zeros(self.mesh.dim, 0)
        return barycentric_forms(self.mesh.dim)[0][top.index(v)]

    def sum_residual(self, points) -> float:
        lam, _ = barycentric_forms(self.mesh.dim)
        total = sum(p(points)[:, 0] for p in lam)
        return float(np.max(np.abs(total - 1)))

    def max_gradient(self) -> float:
        """max over v and top simplices of |d eta_v| in the mesh metric."""
        _, grads = barycentric_forms(self.mesh.dim)
        Gi = self.mesh.gram_inv
        sq = np.einsum("vi,tij,vj->tv", grads, Gi, grads)
        return float(np.sqrt(sq.max()))


class BicomplexElement:
    """Bidegree (k, m) element: data[i] maps top index -> PolyForm on simplex (m, i)."""

    def __init__(self, cover: StarCover, k: int, m: int, data):
        n = cover.dim
        if not 0 <= k <= n or not 0 <= m <= n:
            raise InvalidDegreeError(f"bidegree ({k}, {m}) outside 0..{n}")
        data = list(data)
        if len(data) != cover.complex.count(m):
            raise DimensionMismatchError(f"need one component per {m}-simplex")
        for i, comp in enumerate(data):
            if set(comp) != set(cover.star(m, i)):
                raise DimensionMismatchError(f"component {i} is not defined on its open star")
        self.cover, self.k, self.m, self.data = cover, k, m, data

    @classmethod
    def zeros(cls, cover, k, m):
        z = PolyForm.zeros(cover.dim, k)
        return cls(cover, k, m, [{T: z for T in cover.star(m, i)} for i in range(cover.complex.count(m))])

    @classmethod
    def random(cls, cover, k, m, rng=None):
        """Components f_D * W(theta_D): f_D affine in the hat functions and
        theta_D a random k-cochain, so each component is continuous on U_D."""
        rng = np.random.default_rng(rng)
        mesh = cover.mesh
        n = mesh.dim
        lam, _ = barycentric_forms(n)
        faces_loc = list(itertools.combinations(range(n + 1), k + 1))
        faces = mesh.faces_of_tops(k)
        data = []
        for i in range(cover.complex.count(m)):
            a = rng.standard_normal(mesh.complex.n_vertices)
            c0 = rng.standard_normal()
            theta = rng.standard_normal(mesh.complex.count(k))
            comp = {}
            for T in cover.star(m, i):
                top = mesh.tops[T]
                f = PolyForm.affine(n, c0, np.zeros(n))
                for j, v in enumerate(top):
                    f = f + lam[j] * a[v]
                w = PolyForm.zeros(n, k, 2)
                for fl, g in zip(faces_loc, faces[T]):
                    w = w + whitney_local(n, fl) * theta[g]
                comp[T] = w.times(f)
            data.append(comp)
        return cls(cover, k, m, data)

    def component(self, simplex) -> dict:
        """Component on an arbitrarily ordered simplex, sign-adjusted."""
        idx, sign = self.cover.complex.find(simplex)
        return {T: p * sign for T, p in self.data[idx].items()}

    def _check(self, other):
        if (self.k, self.m) != (other.k, other.m) or self.cover is not other.cover:
            raise DimensionMismatchError("elements live in different spaces")

    def __add__(self, other):
        self._check(other)
        return BicomplexElement(self.cover, self.k, self.m, [{T: a[T] + b[T] for T in a} for a, b in zip(self.data, other.data)])

    def __sub__(self, other):
        self._check(other)
        return BicomplexElement(self.cover, self.k, self.m, [{T: a[T] - b[T] for T in a} for a, b in zip(self.data, other.data)])

    def __mul__(self, c):
        return BicomplexElement(self.cover, self.k, self.m, [{T: p * c for T, p in comp.items()} for comp in self.data])

    __rmul__ = __mul__

    def nodal(self, points):
        """Yield (simplex index, top index, component values at the reference points)."""
        for i, comp in enumerate(self.data):
            for T, p in comp.items():
                yield i, T, p(points)

    def max_abs(self, points) -> float:
        return max((float(np.max(np.abs(v))) for _, _, v in self.nodal(points)), default=0.0)

    def __repr__(self):
        return f"BicomplexElement(k={self.k}, m={self.m})"


def nodal_difference(a: BicomplexElement, b: BicomplexElement, points) -> float:
    return (a - b).max_abs(points)


def d_prime(omega: BicomplexElement) -> BicomplexElement:
    """(-1)^m times the exterior derivative of every component."""
    if omega.k >= omega.cover.dim:
        raise InvalidDegreeError("d' of a top-degree element")
    s = -1.0 if omega.m % 2 else 1.0
    return BicomplexElement(
        omega.cover, omega.k + 1, omega.m, [{T: p.d() * s for T, p in comp.items()} for comp in omega.data]
    )


def d_double_prime(omega: BicomplexElement) -> BicomplexElement:
    """(d'' w)_D = sum_i (-1)^i w_{d_i D} restricted to U_D."""
    cover, m = omega.cover, omega.m
    X = cover.complex
    if m >= cover.dim:
        raise InvalidDegreeError("d'' out of the top Cech degree")
    data = []
    for i, D in enumerate(X.simplices[m + 1]):
        comp = {}
        for j in range(len(D)):
            src = omega.data[X.index[m][D[:j] + D[j + 1 :]]]
            sign = -1.0 if j % 2 else 1.0
            for T in cover.star(m + 1, i):
                comp[T] = comp[T] + src[T] * sign if T in comp else src[T] * sign
        data.append(comp)
    return BicomplexElement(cover, omega.k, m + 1, data)


def _comass_values(omega, quad):
    mesh = omega.cover.mesh
    M = mesh.comass_matrix(omega.k)
    vals, wts = [], []
    for _, T, v in omega.nodal(quad.points):
        big = float(np.max(np.abs(v), initial=0.0)) or 1.0
        u = v / big
        vals.append(big * np.sqrt(np.maximum(np.einsum("qa,ab,qb->q", u, M[T], u), 0.0)))
        wts.append(quad.weights[T])
    if not vals:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(vals), np.concatenate(wts)


def bicomplex_modular(phi: YoungFunction, omega: BicomplexElement, alpha: float, quad: MeshQuadrature | None = None) -> float:
    """sum_D int_{U_D} phi(|w_D| / alpha) dV by quadrature."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    quad = quad or mesh_quadrature(omega.cover.mesh)
    vals, wts = _comass_values(omega, quad)
    return float(np.sum(wts * phi(vals / alpha)))


def bicomplex_norm(phi: YoungFunction, omega: BicomplexElement, quad: MeshQuadrature | None = None, tol: float = DEFAULT_TOL) -> float:
    quad = quad or mesh_quadrature(omega.cover.mesh)
    vals, wts = _comass_values(omega, quad)
    if vals.size == 0:
        return 0.0
    return float(luxemburg(phi, vals, DiscreteMeasure(wts), tol).norm)


def bicomplex_graph_norm(phi, omega, quad=None, tol=DEFAULT_TOL) -> float:
    out = bicomplex_norm(phi, omega, quad, tol)
    if omega.k < omega.cover.dim:
        out += bicomplex_norm(phi, d_prime(omega), quad, tol)
    return out


def row_homotopy_H(omega: BicomplexElement) -> BicomplexElement:
    """Averaged cone contraction on each star with sign (-1)^m.

    For k = 0 the result is the degree-zero average, returned as an element of
    bidegree (0, m) whose components are constants.
    """
    cover, k, m = omega.cover, omega.k, omega.m
    n = cover.dim
    s = -1.0 if m % 2 else 1.0
    data = []
    for i, comp in enumerate(omega.data):
        out = {}
        if k == 0:
            vals = []
            for T, p in comp.items():
                X, w = cover.centers_in(m, i, T)
                vals.append(float(w @ p(X)[:, 0]))
            const = PolyForm.constant(n, 0, [float(np.mean(vals))])
            out = {T: const for T in comp}
        else:
            for T, p in comp.items():
                X, w = cover.centers_in(m, i, T)
                acc = p.cone(X[0]) * w[0]
                for x, wx in zip(X[1:], w[1:]):
                    acc = acc + p.cone(x) * wx
                out[T] = acc * s
        data.append(out)
    return BicomplexElement(cover, max(k - 1, 0), m, data)


def column_homotopy_P(omega: BicomplexElement, pou: PartitionOfUnity | None = None):
    """(P w)_D = (-1)^m sum_v eta_v w_{Dv}; for m = 0 the global form sum_v eta_v w_v."""
    cover, k, m = omega.cover, omega.k, omega.m
    X = cover.complex
    mesh = cover.mesh
    pou = pou or PartitionOfUnity(mesh)
    if m == 0:
        pieces = []
        for T, top in enumerate(mesh.tops):
            acc = PolyForm.zeros(mesh.dim, k)
            for v in top:
                acc = acc + omega.data[v][T].times(pou.piece(T, v))
            pieces.append(acc)
        return PiecewiseForm(mesh, k, pieces)
    s = -1.0 if m % 2 else 1.0
    data = []
    for i, D in enumerate(X.simplices[m - 1]):
        comp = {}
        for T in cover.star(m - 1, i):
            acc = PolyForm.zeros(mesh.dim, k)
            for v in mesh.tops[T]:
                if v in D:
                    continue
                j, sign = X.find(D + (v,))
                acc = acc + omega.data[j][T].times(pou.piece(T, v)) * (sign * s)
            comp[T] = acc
        data.append(comp)
    return BicomplexElement(cover, k, m - 1, data)


def restrict_E(cover: StarCover, form) -> BicomplexElement:
    """The family (form restricted to U_v)_v of bidegree (k, 0)."""
    return BicomplexElement(cover, form.degree, 0, [{T: form.piece(T) for T in cover.star(0, v)} for v in range(cover.complex.n_vertices)])


def glue_E(omega: BicomplexElement, points=None, tol: float = CLOSED_TOL) -> PiecewiseForm:
    """Glue a d''-closed (k, 0) family into a global form."""
    if omega.m != 0:
        raise InvalidDegreeError("glue_E takes bidegree (k, 0)")
    cover = omega.cover
    mesh = cover.mesh
    if points is None:
        points = mesh_quadrature(mesh).points
    if mesh.dim > 0:
        res = d_double_prime(omega).max_abs(points)
        scale = max(1.0, omega.max_abs(points))
        if res > tol * scale:
            raise NotACocycleError(f"components disagree on overlaps (residual {res:.3e})")
    return PiecewiseForm(mesh, omega.k, [omega.data[top[0]][T] for T, top in enumerate(mesh.tops)])


def constants_F(omega: BicomplexElement, points=None, tol: float = CLOSED_TOL) -> Cochain:
    """Cochain of the constant values of a d'-closed (0, m) element."""
    if omega.k != 0:
        raise InvalidDegreeError("constants_F takes bidegree (0, m)")
    cover = omega.cover
    if points is None:
        points = mesh_quadrature(cover.mesh).points
    vals = np.empty(cover.complex.count(omega.m))
    scale = max(1.0, omega.max_abs(points))
    for i, comp in enumerate(omega.data):
        node_vals = np.concatenate([p(points)[:, 0] for p in comp.values()])
        if np.ptp(node_vals) > tol * scale:
            raise NotInKernelError(f"component {i} is not constant (spread {np.ptp(node_vals):.3e})")
        vals[i] = node_vals.mean()
    return Cochain(cover.complex, omega.m, vals)


def constants_F_inverse(cover: StarCover, theta: Cochain) -> BicomplexElement:
    n = cover.dim
    m = theta.degree
    return BicomplexElement(
        cover, 0, m, [{T: PolyForm.constant(n, 0, [theta.values[i]]) for T in cover.star(m, i)} for i in range(cover.complex.count(m))]
    )


def volume_constant(cover: StarCover) -> float:
    """V = max(largest star volume, 1 / smallest star volume) over all simplices."""
    vols = np.concatenate([cover.star_volumes(m) for m in range(cover.dim + 1)])
    return float(max(vols.max(), 1.0 / vols.min()))


@dataclass
class ZigzagResult:
    cochain: Cochain
    closed_residuals: list = field(default_factory=list)


def zigzag_derham_to_simplicial(cover: StarCover, omega, points=None, tol: float = BREAKDOWN_TOL) -> ZigzagResult:
    """Carry a closed global k-form through the bicomplex to a simplicial k-cocycle."""
    mesh = cover.mesh
    k = omega.degree
    if points is None:
        points = mesh_quadrature(mesh).points
    w = restrict_E(cover, omega)
    scale = max(1.0, w.max_abs(points))
    if k < mesh.dim:
        res = d_prime(w).max_abs(points)
        if res > CLOSED_TOL * scale:
            raise NotACocycleError(f"input form is not closed (|d omega| = {res:.3e})")
    residuals = []
    for j in range(k):
        alpha = row_homotopy_H(w)
        w = d_double_prime(alpha)
        if w.k < mesh.dim:
            res = d_prime(w).max_abs(points) / max(1.0, w.max_abs(points))
        else:
            res = 0.0
        residuals.append(res)
        if res > tol:
            raise NumericalBreakdownError(f"zig-zag step {j + 1} lost closedness", j + 1, res)
    return ZigzagResult(constants_F(w, points, tol=tol), residuals)


# --------------------------------------------------------------------------
# identity residuals


def identity_residuals(cover: StarCover, k: int, m: int, rng=None, points=None) -> dict:
    """Nodal residuals of d'd', d''d'', d'd''+d''d', the P identity and the H
    identity on random elements of bidegree (k, m)."""
    rng = np.random.default_rng(rng)
    n = cover.dim
    if points is None:
        points = mesh_quadrature(cover.mesh).points
    w = BicomplexElement.random(cover, k, m, rng)
    scale = max(1.0, w.max_abs(points))
    out = {}
    if k + 2 <= n:
        out["dd_prime"] = d_prime(d_prime(w)).max_abs(points) / scale
    if m + 2 <= n:
        out["dd_double_prime"] = d_double_prime(d_double_prime(w)).max_abs(points) / scale
    if k < n and m < n:
        out["anticommute"] = (d_prime(d_double_prime(w)) + d_double_prime(d_prime(w))).max_abs(points) / scale
    out["P"] = p_identity_residual(w, points)
    out["H"] = h_identity_residual(w, points)
    return out


def p_identity_residual(w: BicomplexElement, points) -> float:
    """|P d'' w + d'' P w - w| (or with the inclusion of P^0 w when m = 0)."""
    cover = w.cover
    n = cover.dim
    scale = max(1.0, w.max_abs(points))
    if w.m < n:
        lhs = column_homotopy_P(d_double_prime(w))
    else:
        lhs = BicomplexElement.zeros(cover, w.k, w.m)
    if w.m == 0:
        lhs = lhs + restrict_E(cover, column_homotopy_P(w))
    else:
        lhs = lhs + d_double_prime(column_homotopy_P(w))
    return (lhs - w).max_abs(points) / scale


def h_identity_residual(w: BicomplexElement, points) -> float:
    """|H d' w + d' H w - w|, with the constant H w in place of d' H w when k = 0."""
    n = w.cover.dim
    scale = max(1.0, w.max_abs(points))
    if w.k == 0:
        lhs = row_homotopy_H(d_prime(w)) + row_homotopy_H(w) if n > 0 else row_homotopy_H(w)
    else:
        lhs = d_prime(row_homotopy_H(w))
        if w.k < n:
            lhs = lhs + row_homotopy_H(d_prime(w))
    return (lhs - w).max_abs(points) / scale


def d_double_prime_ratio(phi: YoungFunction, cover: StarCover, k: int, m: int, trials: int = 10, seed: int = 0, quad=None) -> dict:
    """Empirical ||d'' w|| / ||w|| over random elements: max and mean."""
    rng = np.random.default_rng(seed)
    quad = quad or mesh_quadrature(cover.mesh)
    ratios = []
    for _ in range(trials):
        w = BicomplexElement.random(cover, k, m, rng)
        den = bicomplex_norm(phi, w, quad)
        if den > 0:
            ratios.append(bicomplex_norm(phi, d_double_prime(w), quad) / den)
    return {"max": float(max(ratios)), "mean": float(np.mean(ratios))}


def glue_ratio(phi: YoungFunction, cover: StarCover, form, quad=None) -> float:
    """||restrict_E(form)||_C / ||form||_{L^phi}."""
    from .mesh import lphi_norm

    quad = quad or mesh_quadrature(cover.mesh)
    den = lphi_norm(phi, cover.mesh, form, quad)
    return bicomplex_norm(phi, restrict_E(cover, form), quad) / den if den > 0 else 1.0


def constants_ratio(phi: YoungFunction, cover: StarCover, theta: Cochain, quad=None) -> float:
    """||F^{-1} theta||_C / ||theta||_{l^phi}."""
    from .simplicial import cochain_norm

    quad = quad or mesh_quadrature(cover.mesh)
    den = cochain_norm(phi, theta)
    return bicomplex_norm(phi, constants_F_inverse(cover, theta), quad) / den if den > 0 else 1.0
