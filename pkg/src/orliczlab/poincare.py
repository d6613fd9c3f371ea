"""The averaged cone homotopy on the unit ball, evaluated by quadrature.

For a k-form omega on B (k >= 1) and a point x,

    chi_x(omega)_y(u...) = int_0^1 t^(k-1) omega_{x + t(y - x)}(y - x, u...) dt,

and h averages chi_x over x in the half ball. The exterior derivative of h
is taken by central finite differences, so the identity d h + h d = Id is
checked with no symbolic help.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidDegreeError, InvalidParameterError, UnsupportedDimensionError
from .orlicz import DiscreteMeasure, luxemburg
from .polyforms import PolyForm, _interior_table, _wedge_table, basis
from .quadrature import QuadratureRule, ball_rule, ball_volume
from .young import YoungFunction

FD_STEP = 1e-4
BOUNDARY_MARGIN = 1e-3


@dataclass(frozen=True, eq=False)
class AnalyticForm:
    """A k-form on a ball of R^n given by component evaluators.

    ``value`` maps points (N x n) to components (N x C(n,k)); ``d_value`` does
    the same for the exterior derivative (None in top degree).
    """

    dim: int
    degree: int
    value: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    d_value: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)
    label: str = ""

    def __call__(self, pts):
        return np.asarray(self.value(np.atleast_2d(pts)), dtype=float)

    def d(self, pts):
        if self.d_value is None:
            return np.zeros((np.atleast_2d(pts).shape[0], len(basis(self.dim, self.degree + 1))))
        return np.asarray(self.d_value(np.atleast_2d(pts)), dtype=float)

    @classmethod
    def from_polyform(cls, pf: PolyForm, label: str = "") -> "AnalyticForm":
        d = pf.d() if pf.k < pf.n else None
        return cls(pf.n, pf.k, pf, d, label)


def polynomial_form(n: int, k: int, terms, label: str = "") -> AnalyticForm:
    """Form from terms ``(coef, exponents, I)``: coef * x^exponents dx^I."""
    comps = basis(n, k)
    deg = max([sum(e) for _, e, _ in terms], default=0)
    arr = np.zeros((len(comps),) + (deg + 1,) * n)
    for coef, exps, I in terms:
        arr[(comps.index(tuple(I)),) + tuple(exps)] += coef
    return AnalyticForm.from_polyform(PolyForm(n, k, arr), label)


def check_analytic_d(form: AnalyticForm, rng=None, n_points: int = 20, step: float = 1e-5) -> float:
    """Max discrepancy between ``d_value`` and finite differences of ``value``."""
    if form.degree >= form.dim:
        return 0.0
    rng = np.random.default_rng(rng)
    Y = _uniform_ball(rng, form.dim, n_points, 0.9)
    fd = _fd_exterior(lambda P: form(P), Y, form.dim, form.degree, step)
    return float(np.max(np.abs(fd - form.d(Y))))


def monomial_corpus(n: int, max_degree: int = 4, degrees=None) -> list[AnalyticForm]:
    """All forms x^a dx^I with |a| <= max_degree."""
    out = []
    exps = [e for d in range(max_degree + 1) for e in itertools.product(range(d + 1), repeat=n) if sum(e) == d]
    for k in degrees if degrees is not None else range(1, n + 1):
        for I in basis(n, k):
            for e in exps:
                out.append(polynomial_form(n, k, [(1.0, e, I)], f"x^{e} dx^{I}"))
    return out


def random_polynomial_form(n: int, k: int, max_degree: int, rng) -> AnalyticForm:
    rng = np.random.default_rng(rng)
    arr = rng.standard_normal((len(basis(n, k)),) + (max_degree + 1,) * n)
    arr[:, np.indices((max_degree + 1,) * n).sum(axis=0) > max_degree] = 0.0
    return AnalyticForm.from_polyform(PolyForm(n, k, arr), f"random degree<={max_degree}")


@dataclass(frozen=True)
class BallQuadrature:
    """Rules on the unit ball, on the half ball and for the cone parameter."""

    dim: int
    full: QuadratureRule
    half: QuadratureRule
    t_nodes: np.ndarray
    t_weights: np.ndarray
    sizes: tuple = ()

    def refined(self) -> "BallQuadrature":
        """Double every node count."""
        r, a, t = self.sizes
        return ball_quadrature(self.dim, 2 * r, 2 * a, 2 * t)


def ball_quadrature(dim: int, n_radial: int = 4, n_angular: int = 8, n_t: int = 32) -> BallQuadrature:
    if dim not in (1, 2, 3):
        raise UnsupportedDimensionError("ball quadrature supports n <= 3")
    x, w = roots_legendre(n_t)
    return BallQuadrature(
        dim,
        ball_rule(dim, 1.0, 2 * n_radial, 2 * n_angular),
        ball_rule(dim, 0.5, n_radial, n_angular),
        (x + 1) / 2,
        w / 2,
        (n_radial, n_angular, n_t),
    )


def _uniform_ball(rng, n, count, radius=1.0):
    v = rng.standard_normal((count, n))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * radius * rng.random((count, 1)) ** (1.0 / n)


def _cone_components(omega: AnalyticForm, X, Y, t, wt) -> np.ndarray:
    """chi_x(omega)_y components for all pairs: shape (Ny, Nx, C(n, k-1))."""
    n, k = omega.dim, omega.degree
    Z = Y[:, None, :] - X[None, :, :]  # (Ny, Nx, n)
    pts = X[None, :, None, :] + t[None, None, :, None] * Z[:, :, None, :]
    vals = omega(pts.reshape(-1, n)).reshape(pts.shape[:3] + (-1,))
    # integrate t^(k-1) omega over t before contracting: the contraction is linear
    I = np.einsum("yxtc,t->yxc", vals, wt * t ** (k - 1))
    out = np.zeros(Z.shape[:2] + (len(basis(n, k - 1)),))
    for i, j_in, j_out, sign in _interior_table(n, k):
        out[..., j_out] += sign * Z[..., i] * I[..., j_in]
    return out


def cone_contraction(omega: AnalyticForm, x, y, vectors=(), quad: BallQuadrature | None = None) -> float:
    """chi_x(omega)_y(u_1, ..., u_{k-1}) by the cone-parameter rule."""
    if omega.degree < 1:
        raise InvalidDegreeError("cone contraction needs degree >= 1")
    quad = quad or ball_quadrature(omega.dim)
    comps = _cone_components(omega, np.atleast_2d(x), np.atleast_2d(y), quad.t_nodes, quad.t_weights)[0, 0]
    return _apply_vectors(comps, omega.dim, omega.degree - 1, vectors)


def _apply_vectors(comps, n, k, vectors):
    vectors = np.asarray(vectors, dtype=float).reshape(k, n) if k else np.zeros((0, n))
    if k == 0:
        return float(comps[0])
    return float(sum(c * np.linalg.det(vectors[:, list(I)]) for c, I in zip(comps, basis(n, k))))


def homotopy_components(omega: AnalyticForm, quad: BallQuadrature, Y) -> np.ndarray:
    """Components of h(omega) at points Y (k >= 1): shape (Ny, C(n, k-1))."""
    if omega.degree < 1:
        raise InvalidDegreeError("use degree0_average for 0-forms")
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    vol = ball_volume(omega.dim, 0.5)
    X, w = quad.half.points, quad.half.weights
    out = np.empty((Y.shape[0], len(basis(omega.dim, omega.degree - 1))))
    # chunk the sample points to bound memory
    step = max(1, 400_000 // (X.shape[0] * quad.t_nodes.size))
    for s in range(0, Y.shape[0], step):
        C = _cone_components(omega, X, Y[s : s + step], quad.t_nodes, quad.t_weights)
        out[s : s + step] = np.einsum("yxc,x->yc", C, w) / vol
    return out


def averaged_homotopy(omega: AnalyticForm, quad: BallQuadrature, eval_point, vectors=()) -> float:
    comps = homotopy_components(omega, quad, np.atleast_2d(eval_point))[0]
    return _apply_vectors(comps, omega.dim, omega.degree - 1, vectors)


def degree0_average(f: AnalyticForm, quad: BallQuadrature) -> float:
    """Mean of a 0-form over the half ball."""
    if f.degree != 0:
        raise InvalidDegreeError("degree0_average takes a 0-form")
    vals = f(quad.half.points)[:, 0]
    return float(quad.half.weights @ vals / ball_volume(f.dim, 0.5))


def _fd_exterior(fn, Y, n, k, step):
    """Exterior derivative of a k-form given by ``fn`` via central differences."""
    partials = []
    for i in range(n):
        e = np.zeros(n)
        e[i] = step
        partials.append((fn(Y + e) - fn(Y - e)) / (2 * step))
    out = np.zeros((Y.shape[0], len(basis(n, k + 1))))
    for i, j_in, j_out, sign in _wedge_table(n, k):
        out[:, j_out] += sign * partials[i][:, j_in]
    return out


@dataclass(frozen=True)
class IdentityReport:
    max_residual: float
    n_points: int
    skipped: int


def _interior(points, n):
    points = np.atleast_2d(np.asarray(points, dtype=float))
    keep = np.linalg.norm(points, axis=1) < 1 - BOUNDARY_MARGIN
    return points[keep], int((~keep).sum())


def _relative(diff, ref):
    scale = float(np.max(np.abs(ref))) if ref.size else 0.0
    err = float(np.max(np.abs(diff))) if diff.size else 0.0
    return err / scale if scale > 0 else err


def verify_homotopy_identity(omega: AnalyticForm, quad: BallQuadrature, sample_points) -> IdentityReport:
    """Max relative residual of d h(omega) + h(d omega) = omega (k >= 1) or
    h(f) + h(df) = f (k = 0) at the interior sample points."""
    n, k = omega.dim, omega.degree
    Y, skipped = _interior(sample_points, n)
    target = omega(Y)
    dom = AnalyticForm(n, k + 1, omega.d, None) if k < n else None
    if k == 0:
        lhs = degree0_average(omega, quad) + homotopy_components(dom, quad, Y)
    else:
        lhs = _fd_exterior(lambda P: homotopy_components(omega, quad, P), Y, n, k - 1, FD_STEP)
        if dom is not None:
            lhs = lhs + homotopy_components(dom, quad, Y)
    return IdentityReport(_relative(lhs - target, target), len(Y), skipped)


def verify_cone_identity(omega: AnalyticForm, x, quad: BallQuadrature, sample_points) -> IdentityReport:
    """chi_x(d omega) + d chi_x(omega) = omega at fixed x, d by finite differences."""
    n, k = omega.dim, omega.degree
    if k < 1:
        raise InvalidDegreeError("cone identity needs degree >= 1")
    Y, skipped = _interior(sample_points, n)
    X = np.atleast_2d(np.asarray(x, dtype=float))
    chi = lambda P: _cone_components(omega, X, P, quad.t_nodes, quad.t_weights)[:, 0]  # noqa: E731
    lhs = _fd_exterior(chi, Y, n, k - 1, FD_STEP)
    if k < n:
        dom = AnalyticForm(n, k + 1, omega.d, None)
        lhs = lhs + _cone_components(dom, X, Y, quad.t_nodes, quad.t_weights)[:, 0]
    target = omega(Y)
    return IdentityReport(_relative(lhs - target, target), len(Y), skipped)


@dataclass(frozen=True)
class BoundednessReport:
    ratio: float
    refined_ratio: float
    relative_change: float
    finite: bool
    contradiction: bool


def _ball_norm(phi, comps, rule):
    vals = np.linalg.norm(np.atleast_2d(comps), axis=-1)
    return float(luxemburg(phi, vals, DiscreteMeasure(rule.weights)).norm)


def _ratio(phi, omegas, quad):
    best, contradiction = 0.0, False
    P = quad.full.points
    for om in omegas:
        if om.degree == 0:
            hv = np.full((P.shape[0], 1), degree0_average(om, quad))
        else:
            hv = homotopy_components(om, quad, P)
        num = _ball_norm(phi, hv, quad.full)
        den = _ball_norm(phi, om(P), quad.full)
        if den == 0:
            contradiction |= num > 0
            continue
        best = max(best, num / den)
    return best, contradiction


def verify_boundedness(phi: YoungFunction, omegas, quad: BallQuadrature) -> BoundednessReport:
    """Empirical max ||h omega||_phi / ||omega||_phi and its change when every
    node count doubles."""
    omegas = list(omegas)
    if not omegas:
        raise InvalidParameterError("need at least one form")
    r0, c0 = _ratio(phi, omegas, quad)
    r1, c1 = _ratio(phi, omegas, quad.refined())
    change = abs(r1 - r0) / r0 if r0 > 0 else abs(r1 - r0)
    return BoundednessReport(r0, r1, change, bool(np.isfinite(r0) and np.isfinite(r1)), c0 or c1)


# coarse rules used to observe convergence of the identity residual
TREND_BASE = (1, 2, 1)


def refinement_trend(omegas, sample_points, base=TREND_BASE) -> dict:
    """Max corpus residual at a coarse rule and with every node count doubled."""
    omegas = list(omegas)
    dim = omegas[0].dim
    q0 = ball_quadrature(dim, *base)
    q1 = q0.refined()
    r0 = max(verify_homotopy_identity(om, q0, sample_points).max_residual for om in omegas)
    r1 = max(verify_homotopy_identity(om, q1, sample_points).max_residual for om in omegas)
    return {"base": r0, "doubled": r1, "ratio": r0 / r1 if r1 > 0 else float("inf")}


def sample_points(dim: int, count: int = 50, seed: int = 0, radius: float = 0.9) -> np.ndarray:
    return _uniform_ball(np.random.default_rng(seed), dim, count, radius)
