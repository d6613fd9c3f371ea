"""Modulars and Luxemburg norms on finite weighted measure spaces."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatchError, InvalidParameterError
from .young import YoungFunction, conjugate, scale

DEFAULT_TOL = 1e-12
_MAX_BRACKET_STEPS = 2000


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finite point set with strictly positive weights."""

    weights: np.ndarray
    points: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if w.size and not np.all(w > 0):
            raise InvalidParameterError("measure weights must be strictly positive")
        object.__setattr__(self, "weights", w)
        if self.points and len(self.points) != w.size:
            raise DimensionMismatchError("points and weights differ in length")

    @classmethod
    def counting(cls, n: int) -> "DiscreteMeasure":
        return cls(np.ones(n))

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class NormResult:
    norm: float | np.ndarray
    modular_at_norm: float | np.ndarray
    iterations: int


def _aligned(f, mu):
    f = np.asarray(f, dtype=float)
    if f.shape[-1] != len(mu):
        raise DimensionMismatchError(
            f"function has {f.shape[-1]} values but the measure has {len(mu)} points"
        )
    return f


def modular(phi: YoungFunction, f, mu: DiscreteMeasure):
    """sum_i w_i phi(f_i); rows of a 2-d ``f`` are treated independently."""
    f = _aligned(f, mu)
    vals = phi(f) * mu.weights
    # numpy reductions use pairwise summation, which fixes the order
    out = np.sum(vals, axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def luxemburg_bisect(
    modular_of: Callable[[np.ndarray], np.ndarray],
    alpha0: np.ndarray,
    tol: float = DEFAULT_TOL,
) -> NormResult:
    """Smallest alpha with modular_of(alpha) <= 1, for a batch of problems.

    ``modular_of`` maps an array of positive scales to the modular values of
    the corresponding problems and must be nonincreasing in each entry. Entries
    of ``alpha0`` equal to zero denote zero functions and return norm 0.
    """
    if not tol > 0:
        raise InvalidParameterError("tol must be positive")
    alpha0 = np.atleast_1d(np.asarray(alpha0, dtype=float))
    live = alpha0 > 0
    start = np.where(live, alpha0, 1.0)
    m0 = modular_of(start)
    lo = np.where(live & (m0 > 1), start, np.nan)
    hi = np.where(live & (m0 <= 1), start, np.nan)
    iters = 0
    # double until the modular drops to one, or halve until it exceeds one
    for _ in range(_MAX_BRACKET_STEPS):
        up = live & np.isnan(hi)
        down = live & np.isnan(lo)
        if not (up.any() or down.any()):
            break
        iters += 1
        trial = np.where(up, lo * 2.0, np.where(down, hi * 0.5, 1.0))
        ok = modular_of(trial) <= 1
        hi = np.where((up | down) & ok, trial, hi)
        lo = np.where((up | down) & ~ok, trial, lo)
    else:  # pragma: no cover - only reachable for pathological modulars
        raise RuntimeError("Luxemburg bracketing did not terminate")
    lo = np.where(live, lo, 0.0)
    hi = np.where(live, hi, 0.0)
    while True:
        active = live & (hi - lo > tol * hi)
        if not active.any():
            break
        iters += 1
        mid = np.where(active, 0.5 * (lo + hi), 1.0)
        # subnormal brackets can stop shrinking; hi is then the answer
        stuck = active & ((mid <= lo) | (mid >= hi))
        if stuck.any():
            lo = np.where(stuck, hi, lo)
            active &= ~stuck
            if not active.any():
                break
            mid = np.where(active, mid, 1.0)
        mm = modular_of(mid)
        ok = mm <= 1
        hi = np.where(active & ok, mid, hi)
        lo = np.where(active & ~ok, mid, lo)
    at_norm = np.where(live, modular_of(np.where(live, hi, 1.0)), 0.0)
    return NormResult(hi, at_norm, iters)


def luxemburg(phi: YoungFunction, f, mu: DiscreteMeasure, tol: float = DEFAULT_TOL) -> NormResult:
    """Luxemburg norm with diagnostics. ``f`` may be 1-d or a batch of rows."""
    f = _aligned(f, mu)
    single = f.ndim == 1
    F = np.atleast_2d(np.abs(f))
    w = mu.weights

    def modular_of(alpha):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            return np.sum(phi(F / alpha[:, None]) * w, axis=-1)

    alpha0 = F.max(axis=-1, initial=0.0) * max(mu.total_mass, 1e-300)
    res = luxemburg_bisect(modular_of, alpha0, tol)
    if single:
        return NormResult(float(res.norm[0]), float(res.modular_at_norm[0]), res.iterations)
    return res


def luxemburg_norm(phi: YoungFunction, f, mu: DiscreteMeasure | None = None, tol: float = DEFAULT_TOL):
    """inf{alpha > 0 : modular(phi, f / alpha, mu) <= 1}; counting measure by default."""
    f = np.asarray(f, dtype=float)
    if mu is None:
        mu = DiscreteMeasure.counting(f.shape[-1])
    return luxemburg(phi, f, mu, tol).norm


@dataclass(frozen=True)
class ScalingReport:
    a: float
    b: float
    K: float
    passed: bool


def check_scaling_equivalence(phi, lam, f, mu=None, tol=1e-9) -> ScalingReport:
    """Compare the norms for phi and lam*phi against K = max(lam, 1/lam)."""
    scaled = scale(phi, lam)
    a = luxemburg_norm(phi, f, mu)
    b = luxemburg_norm(scaled, f, mu)
    K = max(lam, 1.0 / lam)
    passed = np.all((a / K - tol <= b) & (b <= K * a + tol))
    return ScalingReport(a, b, K, bool(passed))


@dataclass(frozen=True)
class HolderReport:
    lhs: float | np.ndarray
    rhs: float | np.ndarray
    passed: bool
    conjugate_infinite: bool


def check_holder(phi, f, g, mu=None, conj_params=None, tol=1e-8, conj=None) -> HolderReport:
    """||f g||_1 <= 2 ||f||_phi ||g||_phi* with phi* the numeric conjugate.

    Rows of 2-d ``f``/``g`` are independent trials. Pass ``conj`` to reuse a
    prebuilt conjugate between calls.
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise DimensionMismatchError("f and g must have the same shape")
    if mu is None:
        mu = DiscreteMeasure.counting(f.shape[-1])
    if conj is None:
        conj = conjugate(phi, **(conj_params or {}))
    lhs = np.sum(np.abs(f * g) * mu.weights, axis=-1)
    nf = luxemburg_norm(phi, f, mu)
    ng = luxemburg_norm(conj, g, mu)
    infinite = ~np.isfinite(ng)
    rhs = 2.0 * nf * ng
    passed = np.all((lhs <= rhs + tol) | infinite)
    if f.ndim == 1:
        return HolderReport(float(lhs), float(rhs), bool(passed), bool(infinite))
    return HolderReport(lhs, rhs, bool(passed), bool(np.any(infinite)))


def sampled(values: Sequence[float], mu: DiscreteMeasure) -> np.ndarray:
    """Validate that ``values`` is a function on the points of ``mu``."""
    return _aligned(values, mu)
