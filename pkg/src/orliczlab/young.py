"""Young functions: even convex phi >= 0 vanishing only at zero.

Every constructor evaluates at |t|, so evenness holds by construction. Values
are computed with numpy and accept scalars or arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, SpecError

# Objective values above this while the conjugate search is still climbing
# are reported as divergence.
DIVERGENCE_THRESHOLD = 1e30
_MAX_DOUBLINGS = 120
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class YoungFunction:
    name: str
    params: dict
    fn: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    spec: str = ""

    def __call__(self, t):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            out = self.fn(np.abs(np.asarray(t, dtype=float)))
        if np.ndim(out) == 0:
            return float(out)
        return out

    def __repr__(self):
        return f"YoungFunction({self.spec or self.name})"


def make_power(p: float) -> YoungFunction:
    if not p >= 1:
        raise InvalidParameterError(f"power Young function needs p >= 1, got {p}")
    p = float(p)
    return YoungFunction("power", {"p": p}, lambda t: t**p, f"power:p={_fmt(p)}")


def make_power_log(p: float, kappa: float) -> YoungFunction:
    """|t|^p / log(e + 1/|t|)^kappa, extended by 0 at t = 0.

    kappa is the exponent on the logarithmic factor.
    """
    if not p >= 1:
        raise InvalidParameterError(f"powerlog needs p >= 1, got {p}")
    if not kappa >= 0:
        raise InvalidParameterError(f"powerlog needs kappa >= 0, got {kappa}")
    p, kappa = float(p), float(kappa)

    def fn(t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        nz = t > 0
        tn = t[nz]
        out[nz] = tn**p / np.log(math.e + 1.0 / tn) ** kappa
        return out

    return YoungFunction(
        "powerlog", {"p": p, "kappa": kappa}, fn, f"powerlog:p={_fmt(p)},kappa={_fmt(kappa)}"
    )


def make_exp() -> YoungFunction:
    return YoungFunction("exp", {}, np.expm1, "exp")


def scale(phi: YoungFunction, lam: float) -> YoungFunction:
    """The Young function lam * phi."""
    if not lam > 0:
        raise InvalidParameterError(f"scaling factor must be positive, got {lam}")
    lam = float(lam)
    inner = phi.fn
    return YoungFunction(
        "scale",
        {"lambda": lam, "inner": phi},
        lambda t: lam * inner(t),
        f"scale:lambda={_fmt(lam)},inner={phi.spec}",
    )


def complementary(phi: YoungFunction, s: float, t_max: float = 1e3, grid_n: int = 2049) -> float:
    """Numeric convex conjugate sup_{t >= 0} (s t - phi(t)).

    Returns ``math.inf`` when the objective keeps climbing past every search
    bound and exceeds ``DIVERGENCE_THRESHOLD``.
    """
    return float(_conjugate_values(phi, np.array([abs(float(s))]), t_max, grid_n, {})[0])


def conjugate(phi: YoungFunction, t_max: float = 1e3, grid_n: int = 2049) -> YoungFunction:
    """phi* as a callable Young-type function (may take the value +inf)."""
    if grid_n < 2 or not t_max > 0:
        raise InvalidParameterError("conjugate needs grid_n >= 2 and t_max > 0")
    cache: dict = {}

    def fn(s):
        s = np.asarray(s, dtype=float)
        flat = s.ravel()
        return _conjugate_values(phi, flat, t_max, grid_n, cache).reshape(s.shape)

    return YoungFunction(
        "conj",
        {"inner": phi, "t_max": t_max, "grid_n": grid_n},
        fn,
        f"conj:inner={phi.spec}",
    )


def _level_grid(phi, t_max, grid_n, level, cache):
    key = level
    if key not in cache:
        tm = t_max * 2.0**level
        t = np.linspace(0.0, tm, grid_n)
        f = phi(t)
        finite = np.isfinite(f)
        if not finite.all():
            # keep the finite prefix; the conjugate search treats its end as the bound
            stop = int(np.argmin(finite))
            t, f = t[:stop], f[:stop]
        slopes = np.diff(f) / np.diff(t)
        cache[key] = (t, f, slopes, len(t) < grid_n)
    return cache[key]


def _conjugate_values(phi, s, t_max, grid_n, cache):
    if grid_n < 2 or not t_max > 0:
        raise InvalidParameterError("conjugate needs grid_n >= 2 and t_max > 0")
    s = np.abs(s)
    out = np.full(s.shape, np.nan)
    todo = np.arange(s.size)
    for level in range(_MAX_DOUBLINGS + 1):
        if todo.size == 0:
            break
        t, f, slopes, truncated = _level_grid(phi, t_max, grid_n, level, cache)
        sv = s[todo]
        # concave objective: it climbs while the chord slope of phi is below s
        idx = np.searchsorted(slopes, sv, side="left")
        last = len(t) - 1
        inner = idx < last
        if inner.any():
            ii = idx[inner]
            a = t[np.maximum(ii - 1, 0)]
            b = t[np.minimum(ii + 1, last)]
            grid_best = sv[inner] * t[ii] - f[ii]
            out[todo[inner]] = np.maximum(grid_best, _golden_max(phi, sv[inner], a, b))
        edge = ~inner
        if edge.any():
            se = sv[edge]
            val = se * t[last] - f[last]
            diverged = val > DIVERGENCE_THRESHOLD
            if truncated or level == _MAX_DOUBLINGS:
                diverged = np.ones_like(diverged)
            out[todo[edge][diverged]] = math.inf
            todo = todo[edge][~diverged]
        else:
            todo = todo[:0]
    return out


def _golden_max(phi, s, a, b, iters=60):
    """Vectorized golden-section maximization of s t - phi(t) on [a, b]."""
    a = a.astype(float).copy()
    b = b.astype(float).copy()
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = s * c - phi(c)
    fd = s * d - phi(d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        d_new = np.where(left, c, a + _GOLDEN * (b - a))
        c_new = np.where(left, b - _GOLDEN * (b - a), d)
        fd_new = np.where(left, fc, s * d_new - phi(d_new))
        fc_new = np.where(left, s * c_new - phi(c_new), fd)
        c, d, fc, fd = c_new, d_new, fc_new, fd_new
        # the objective is flat at its max: a 1e-9 bracket gives ~1e-18 relative value error
        if np.all(b - a <= 1e-9 * np.maximum(1.0, b)):
            break
    return np.maximum(fc, fd)


def delta2_margin(phi: YoungFunction, t_lo: float, t_hi: float, grid_n: int = 200) -> float:
    """max of phi(2t)/phi(t) over a uniform grid of [t_lo, t_hi]."""
    if not 0 < t_lo < t_hi:
        raise InvalidParameterError("delta2_margin needs 0 < t_lo < t_hi")
    t = np.linspace(t_lo, t_hi, grid_n)
    with np.errstate(over="ignore", invalid="ignore"):
        return float(np.max(phi(2 * t) / phi(t)))


def check_young(phi: YoungFunction, t_max: float = 10.0, grid_n: int = 401, tol: float = 1e-12) -> dict:
    """Sample-grid checks of the defining properties; returns violations."""
    t = np.linspace(-t_max, t_max, grid_n)
    v = phi(t)
    pos = t != 0
    scale_ = np.maximum(1.0, np.abs(v))
    s, u = np.meshgrid(t, t)
    mid = phi((s + u) / 2)
    avg = (phi(s) + phi(u)) / 2
    half = v[t >= 0]
    return {
        "zero_at_zero": abs(phi(0.0)) <= tol,
        "positive_off_zero": bool(np.all(v[pos] > 0)),
        "even": bool(np.all(np.abs(v - phi(-t)) <= tol * scale_)),
        "convex": bool(np.all(mid <= avg + tol * np.maximum(1.0, np.abs(avg)))),
        "monotone": bool(np.all(np.diff(half) >= -tol * np.maximum(1.0, half[1:]))),
    }


def parse_phi(spec: str) -> YoungFunction:
    """Build a Young function from strings like ``power:p=2`` or
    ``scale:lambda=2,inner=power:p=2``."""
    spec = spec.strip()
    name, _, rest = spec.partition(":")
    try:
        if name == "exp":
            if rest:
                raise SpecError(f"exp takes no parameters: {spec!r}")
            return make_exp()
        if name == "scale":
            head, sep, inner = rest.partition("inner=")
            if not sep:
                raise SpecError(f"scale needs inner=...: {spec!r}")
            kw = _kv(head.rstrip(","))
            return scale(parse_phi(inner), kw.pop("lambda"))
        if name == "conj":
            head, sep, inner = rest.partition("inner=")
            if not sep:
                raise SpecError(f"conj needs inner=...: {spec!r}")
            return conjugate(parse_phi(inner), **_kv(head.rstrip(",")))
        kw = _kv(rest)
        if name == "power":
            return make_power(kw.pop("p"))
        if name == "powerlog":
            return make_power_log(kw.pop("p"), kw.pop("kappa", 1.0))
    except KeyError as exc:
        raise SpecError(f"missing parameter {exc} in {spec!r}") from None
    except InvalidParameterError as exc:
        raise SpecError(str(exc)) from None
    raise SpecError(f"unknown Young function {spec!r}")


def _kv(text):
    out = {}
    for item in filter(None, text.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"expected key=value, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise SpecError(f"not a number: {value!r}") from None
    if "grid_n" in out:
        out["grid_n"] = int(out["grid_n"])
    return out


def _fmt(x):
    return repr(int(x)) if float(x).is_integer() else repr(float(x))
