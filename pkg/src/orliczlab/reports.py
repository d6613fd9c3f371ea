"""Verification suites and machine-readable reports.

Every check records a nonnegative value and a tolerance and passes iff
value <= tolerance. Brackets and lower bounds are encoded as violation
amounts so that the rule stays uniform.
"""
from __future__ import annotations

import csv
import io
import json
import math
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bicomplex import (
    StarCover,
    PartitionOfUnity,
    constants_ratio,
    d_double_prime_ratio,
    glue_ratio,
    identity_residuals,
    volume_constant,
    zigzag_derham_to_simplicial,
)
from .cohomology import LinearComplex, betti_numbers, harmonic_basis, numeric_rank
from .errors import NumericalBreakdownError, SpecError
from .mesh import (
    MeshForm,
    PiecewiseForm,
    derham_map,
    exterior_derivative,
    load_mesh,
    lphi_norm,
    mesh_quadrature,
)
from .orlicz import DiscreteMeasure, check_holder, luxemburg, luxemburg_norm, scale
from .poincare import (
    TREND_BASE,
    ball_quadrature,
    monomial_corpus,
    random_polynomial_form,
    refinement_trend,
    sample_points,
    verify_boundedness,
    verify_homotopy_identity,
)
from .simplicial import Cochain, coboundary_norm_estimate, geometry_stats
from .young import check_young, conjugate, parse_phi

SCHEMA = 1
SUITES = ("orlicz", "simplicial", "poincare", "bicomplex", "endtoend")


@dataclass
class Check:
    id: str
    value: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(self.value <= self.tolerance)

    def to_dict(self):
        return {"id": self.id, "value": _num(self.value), "tolerance": _num(self.tolerance), "pass": self.passed}


@dataclass
class VerificationReport:
    suite: str
    checks: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    timing: dict | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check_id: str, value: float, tolerance: float) -> Check:
        c = Check(check_id, float(value), float(tolerance))
        self.checks.append(c)
        return c

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": SCHEMA,
            "suite": self.suite,
            "environment": self.environment,
            "checks": [c.to_dict() for c in self.checks],
            "pass": self.passed,
            "data": self.data,
        }
        if include_timing and self.timing is not None:
            out["timing"] = self.timing
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(_clean(self.to_dict(include_timing)), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text) -> "VerificationReport":
        d = json.loads(text) if isinstance(text, str) else text
        if d.get("schema") != SCHEMA:
            raise SpecError(f"unsupported report schema {d.get('schema')!r}")
        checks = [Check(c["id"], _unnum(c["value"]), _unnum(c["tolerance"])) for c in d["checks"]]
        return cls(d["suite"], checks, d.get("environment", {}), d.get("data", {}), d.get("timing"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "check", "value", "tolerance", "pass"])
        for c in self.checks:
            w.writerow([self.suite, c.id, repr(c.value), repr(c.tolerance), c.passed])
        return buf.getvalue()

    def __eq__(self, other):
        return isinstance(other, VerificationReport) and self.to_dict() == other.to_dict()


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _unnum(x):
    return float(x) if isinstance(x, str) else x


def _clean(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _bracket_violation(lo, hi, lower, upper):
    return max(0.0, lower - lo, hi - upper)


# --------------------------------------------------------------------------
# suites

DEFAULTS = {
    "orlicz": {"phi": "power:p=2", "trials": 200, "seed": 0},
    "simplicial": {"mesh": "sphere:oct", "phi": "power:p=2", "refine": 0, "seed": 0},
    "poincare": {"dim": 2, "degree": None, "phi": "power:p=2", "refine": 0, "seed": 0},
    "bicomplex": {"mesh": "sphere:oct", "phi": "power:p=2", "degree": 1, "refine": 0, "seed": 0, "trials": 10},
    "endtoend": {"mesh": "torus:m=6", "phi": "powerlog:p=2,kappa=1", "refine": 0, "seed": 0},
}


def run_suite(name: str, config: dict | None = None) -> VerificationReport:
    if name not in SUITES:
        raise SpecError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    cfg = dict(DEFAULTS[name])
    cfg.update({k: v for k, v in (config or {}).items() if v is not None})
    phi = parse_phi(cfg["phi"])
    mesh = load_mesh(cfg["mesh"], int(cfg.get("refine", 0))) if "mesh" in cfg else None
    env = {k: cfg[k] for k in sorted(cfg)}
    env["package_version"] = __version__
    env["python"] = platform.python_version()
    report = VerificationReport(name, environment=env)
    start = time.perf_counter()
    try:
        {
            "orlicz": _suite_orlicz,
            "simplicial": _suite_simplicial,
            "poincare": _suite_poincare,
            "bicomplex": _suite_bicomplex,
            "endtoend": _suite_endtoend,
        }[name](report, cfg, phi, mesh)
    except NumericalBreakdownError as exc:
        report.add(f"breakdown_step_{exc.step}", exc.residual, 0.0)
        report.data["error"] = str(exc)
    report.timing = {"seconds": time.perf_counter() - start}
    return report


def _suite_orlicz(report, cfg, phi, mesh):
    rng = np.random.default_rng(int(cfg["seed"]))
    trials = int(cfg["trials"])
    F = rng.standard_normal((trials, 50))
    worst = 0.0
    for p in (1.0, 1.5, 2.0, 4.0):
        got = luxemburg_norm(parse_phi(f"power:p={p}"), F)
        ref = np.sum(np.abs(F) ** p, axis=1) ** (1 / p)
        worst = max(worst, float(np.max(np.abs(got - ref) / ref)))
    report.add("lp_identity_rel_error", worst, 1e-10)
    viol = 0.0
    ratios = {}
    base = luxemburg_norm(phi, F)
    for lam in (0.5, 2.0, 10.0):
        b = luxemburg_norm(scale(phi, lam), F)
        K = max(lam, 1 / lam)
        viol = max(viol, float(np.max(np.maximum(base / K - b, b - K * base))))
        ratios[str(lam)] = [float(np.min(b / base)), float(np.max(b / base))]
    report.add("scaling_bracket_violation", max(viol, 0.0), 1e-9)
    G = rng.standard_normal((trials, 50))
    conj = conjugate(phi)
    h = check_holder(phi, F, G, conj=conj)
    rhs = np.where(np.isfinite(h.rhs), h.rhs, np.inf)
    report.add("holder_violation", max(0.0, float(np.max(h.lhs - rhs))), 1e-8)
    props = check_young(phi)
    report.add("young_property_failures", sum(not v for v in props.values()), 0)
    mu = DiscreteMeasure(rng.random(50) + 0.1)
    res = luxemburg(phi, F[0], mu)
    report.add("modular_at_norm_excess", max(0.0, res.modular_at_norm - 1.0), 1e-12)
    report.data.update({"scaling_ratio_ranges": ratios, "holder_max_ratio": float(np.max(h.lhs / rhs)), "young_checks": props})


def _suite_simplicial(report, cfg, phi, mesh):
    X = mesh.complex
    LC = LinearComplex.from_simplicial(X)
    bad = 0
    for k in range(X.dimension - 1):
        prod = X.coboundary_matrix(k + 1) @ X.coboundary_matrix(k)
        bad += int(prod.count_nonzero())
    report.add("delta_delta_nonzeros", bad, 0)
    exact = betti_numbers(LC, exact=True)
    num = betti_numbers(LC, exact=False)
    report.add("betti_exact_vs_numeric", sum(abs(a - b) for a, b in zip(exact, num)), 0)
    report.add("euler_characteristic_mismatch", abs(sum((-1) ** k * b for k, b in enumerate(exact)) - X.euler_characteristic()), 0)
    rng = np.random.default_rng(int(cfg["seed"]))
    whitney, stokes = 0.0, 0.0
    for k in range(mesh.dim + 1):
        theta = Cochain(X, k, rng.standard_normal(X.count(k)))
        w = MeshForm(mesh, k, theta.values)
        whitney = max(whitney, float(np.max(np.abs(derham_map(mesh, w).values - theta.values))))
        if k < mesh.dim:
            dw = PiecewiseForm(mesh, k + 1, [p.d() for p in w.pieces()])
            lhs = derham_map(mesh, dw).values
            rhs = X.coboundary_matrix(k) @ theta.values
            stokes = max(stokes, float(np.max(np.abs(lhs - rhs) / (1 + np.abs(rhs)))))
    report.add("whitney_property_residual", whitney, 1e-9)
    report.add("stokes_residual", stokes, 1e-9)
    norms = [coboundary_norm_estimate(phi, X, k, trials=20, seed=int(cfg["seed"])) for k in range(X.dimension)]
    report.add("coboundary_norm_nonfinite", sum(not np.isfinite(v) for v in norms), 0)
    stats = geometry_stats(X, mesh.coordinates)
    report.data.update(
        {
            "betti": exact,
            "counts": [X.count(k) for k in range(X.dimension + 1)],
            "coboundary_norm_estimates": norms,
            "geometry": {
                "max_vertex_degree": stats.max_vertex_degree,
                "incidence_bound": stats.incidence_bound,
                "max_cofaces": list(stats.max_cofaces),
            },
            "bilipschitz": mesh.bilipschitz,
        }
    )


def poincare_report_data(dim: int, degree, phi, refine: int = 0, seed: int = 0, report=None) -> dict:
    degrees = [degree] if degree is not None else list(range(1, dim + 1))
    scale_ = 2**refine
    quad = ball_quadrature(dim, 4 * scale_, 8 * scale_, 32 * scale_)
    Y = sample_points(dim, 50, seed)
    corpus = monomial_corpus(dim, 4, degrees)
    res = [verify_homotopy_identity(om, quad, Y) for om in corpus]
    max_res = max(r.max_residual for r in res)
    trend = refinement_trend(corpus, Y, TREND_BASE)
    rng = np.random.default_rng(seed)
    forms = [random_polynomial_form(dim, degrees[0], 3, rng) for _ in range(5)]
    bound = verify_boundedness(phi, forms, ball_quadrature(dim, 4, 8, 32))
    data = {
        "max_residual": max_res,
        "boundedness_ratio": bound.ratio,
        "refinement_trend": trend,
        "boundedness_refined_ratio": bound.refined_ratio,
        "corpus_size": len(corpus),
        "skipped_points": sum(r.skipped for r in res),
        "degrees": degrees,
    }
    if report is not None:
        report.add("homotopy_identity_residual", max_res, 1e-3)
        report.add("refinement_gain_shortfall", 4.0 / trend["ratio"] if trend["ratio"] > 0 else math.inf, 1.0)
        report.add("boundedness_relative_change", bound.relative_change if bound.finite else math.inf, 0.10)
        report.add("boundedness_contradiction", int(bound.contradiction), 0)
    return data


def _suite_poincare(report, cfg, phi, mesh):
    report.data.update(poincare_report_data(int(cfg["dim"]), cfg["degree"], phi, int(cfg["refine"]), int(cfg["seed"]), report))


def zigzag_summary(cover: StarCover, k: int, seed: int = 0, n_exact: int = 2) -> dict:
    """Zig-zag images of harmonic Whitney forms and of a few exact forms."""
    mesh = cover.mesh
    X = mesh.complex
    LC = LinearComplex.from_simplicial(X)
    H = harmonic_basis(LC, k)
    closed = 0.0
    images = []
    for h in H.T:
        z = zigzag_derham_to_simplicial(cover, MeshForm(mesh, k, h))
        closed = max([closed] + z.closed_residuals)
        images.append(z.cochain.values)
    rng = np.random.default_rng(seed)
    exact_pairing = 0.0
    coc = 0.0
    if k > 0:
        for _ in range(n_exact):
            f = MeshForm(mesh, k - 1, rng.standard_normal(X.count(k - 1)))
            z = zigzag_derham_to_simplicial(cover, exterior_derivative(f))
            closed = max([closed] + z.closed_residuals)
            if H.shape[1]:
                exact_pairing = max(exact_pairing, float(np.max(np.abs(z.cochain.values @ H))))
            images.append(z.cochain.values)
    for img in images:
        if k < X.dimension:
            coc = max(coc, float(np.max(np.abs(X.coboundary_matrix(k) @ img), initial=0.0)))
    P = np.array(images) @ H if images and H.shape[1] else np.zeros((len(images), H.shape[1]))
    diag = np.diag(P[: H.shape[1]]) if H.shape[1] else np.zeros(0)
    return {
        "betti_simplicial": int(H.shape[1]),
        "betti_exact": betti_numbers(LC, exact=True)[k],
        "zigzag_rank": numeric_rank(P) if P.size else 0,
        "pairing_matrix": P,
        "closed_residual": closed,
        "cocycle_residual": coc,
        "exact_pairing_max": exact_pairing,
        "sign": float(np.sign(diag[0])) if diag.size else 1.0,
    }


def _suite_bicomplex(report, cfg, phi, mesh):
    seed, k = int(cfg["seed"]), int(cfg["degree"])
    if not 0 <= k <= mesh.dim:
        raise SpecError(f"degree {k} outside 0..{mesh.dim}")
    cover = StarCover(mesh)
    quad = mesh_quadrature(mesh)
    pts = quad.points
    worst: dict = {}
    for kk in range(mesh.dim + 1):
        for m in range(mesh.dim + 1):
            r = identity_residuals(cover, kk, m, rng=seed + 31 * kk + m, points=pts)
            for key, v in r.items():
                worst[key] = max(worst.get(key, 0.0), v)
    dd = max(worst.get("dd_prime", 0.0), worst.get("dd_double_prime", 0.0))
    report.add("dd_residual", dd, 1e-12)
    report.add("anticommute_residual", worst.get("anticommute", 0.0), 1e-12)
    report.add("P_identity_residual", worst["P"], 1e-12)
    report.add("H_identity_residual", worst["H"], 1e-3)
    # gluing ratios on random Whitney forms of degree k
    rng = np.random.default_rng(seed)
    X = mesh.complex
    e_ratios = [glue_ratio(phi, cover, MeshForm(mesh, k, rng.standard_normal(X.count(k))), quad) for _ in range(int(cfg["trials"]))]
    n = mesh.dim
    report.add("E_ratio_bracket_violation", _bracket_violation(min(e_ratios), max(e_ratios), 1.0, n + 1.0), 1e-9)
    V = volume_constant(cover)
    f_ratios = []
    for m in range(n + 1):
        for _ in range(max(1, int(cfg["trials"]) // (n + 1))):
            f_ratios.append(constants_ratio(phi, cover, Cochain(X, m, rng.standard_normal(X.count(m))), quad))
    report.add("F_ratio_bracket_violation", _bracket_violation(min(f_ratios), max(f_ratios), V**-2, V**2), 1e-9)
    # d'' norm ratio and its stability under one refinement
    kb = min(k, n) if n > 0 else 0
    stab = None
    if n > 0:
        fine = load_mesh(cfg["mesh"], int(cfg.get("refine", 0)) + 1)
        r0 = d_double_prime_ratio(phi, cover, kb, 0, trials=int(cfg["trials"]), seed=seed, quad=quad)
        r1 = d_double_prime_ratio(phi, StarCover(fine), kb, 0, trials=int(cfg["trials"]), seed=seed)
        stab = {"coarse": r0, "fine": r1, "relative_change_mean": abs(r1["mean"] - r0["mean"]) / r0["mean"]}
        report.add("d2_ratio_finite", 0 if np.isfinite(r0["max"]) and np.isfinite(r1["max"]) else 1, 0)
        report.add("d2_ratio_refinement_change", stab["relative_change_mean"], 0.10)
    z = zigzag_summary(cover, k, seed)
    report.add("zigzag_closed_residual", z["closed_residual"], 1e-6)
    report.add("zigzag_cocycle_residual", z["cocycle_residual"], 1e-8)
    report.add("zigzag_rank_mismatch", abs(z["zigzag_rank"] - z["betti_exact"]), 0)
    report.add("exact_input_pairing", z["exact_pairing_max"], 1e-6)
    pou = PartitionOfUnity(mesh)
    report.data.update(
        {
            "identity_residuals": {"dd": dd, "anticommute": worst.get("anticommute", 0.0), "H": worst["H"], "P": worst["P"]},
            "norm_ratios": {"E": [min(e_ratios), max(e_ratios)], "F": [min(f_ratios), max(f_ratios)], "V": V},
            "zigzag": {
                "closed_residual": z["closed_residual"],
                "betti": {"simplicial": z["betti_exact"], "zigzag_rank": z["zigzag_rank"], "degree": k},
                "pairing_matrix": z["pairing_matrix"],
                "sign": z["sign"],
            },
            "d2_ratio": stab,
            "cover": {
                "star_shaped": cover.check_star_shaped(),
                "averaging_inside": cover.check_averaging_inside(),
                "pou_sum_residual": pou.sum_residual(pts),
                "pou_max_gradient": pou.max_gradient(),
            },
            "bilipschitz": mesh.bilipschitz,
        }
    )


def _suite_endtoend(report, cfg, phi, mesh):
    seed = int(cfg["seed"])
    cover = StarCover(mesh)
    X = mesh.complex
    betti_s, betti_z, pairings = [], [], {}
    closed = exact = 0.0
    for k in range(mesh.dim + 1):
        z = zigzag_summary(cover, k, seed)
        betti_s.append(z["betti_exact"])
        betti_z.append(z["zigzag_rank"])
        pairings[str(k)] = z["pairing_matrix"]
        closed = max(closed, z["closed_residual"], z["cocycle_residual"])
        exact = max(exact, z["exact_pairing_max"])
    report.add("betti_mismatch", sum(abs(a - b) for a, b in zip(betti_s, betti_z)), 0)
    report.add("zigzag_closed_residual", closed, 1e-6)
    report.add("exact_input_pairing", exact, 1e-6)
    data = {"betti": betti_s, "zigzag_ranks": betti_z, "pairing_matrices": pairings}
    if mesh.dim == 1 and X.euler_characteristic() == 0 and X.count(0) == X.count(1):
        total = winding_total(cover)
        data["winding_total"] = total
        report.add("winding_total_error", abs(abs(total) - 2 * math.pi), 1e-6)
    quad = mesh_quadrature(mesh)
    H = harmonic_basis(LinearComplex.from_simplicial(X), mesh.dim)
    if H.shape[1]:
        form = MeshForm(mesh, mesh.dim, H[:, 0])
        data["top_harmonic_lphi_norm"] = lphi_norm(phi, mesh, form, quad)
    report.data.update(data)


def cycle_orientation(X) -> np.ndarray:
    """Signs orienting the edges of a cycle graph consistently (edge i -> i+1)."""
    sgn = np.ones(X.count(1))
    nv = X.count(0)
    for idx, (a, b) in enumerate(X.simplices[1]):
        if (b - a) % nv != 1:
            sgn[idx] = -1.0
    return sgn


def winding_total(cover: StarCover) -> float:
    """Oriented edge sum of the zig-zag image of the winding form on a cycle."""
    mesh = cover.mesh
    X = mesh.complex
    sgn = cycle_orientation(X)
    form = MeshForm(mesh, 1, sgn * 2 * math.pi / X.count(1))
    z = zigzag_derham_to_simplicial(cover, form)
    return float(np.sum(sgn * z.cochain.values))


# --------------------------------------------------------------------------
# norm tables

TABLE_COLUMNS = ("phi", "target", "norm", "ratio_to_first")


def emit_norm_table(phis, targets, weights=None) -> list[dict]:
    """Luxemburg (vectors) or L^phi (forms) norms for every (phi, target) pair.

    ``targets`` holds 1-d arrays or mesh forms; ``ratio_to_first`` divides by
    the norm of the same target under the first phi.
    """
    phis = [parse_phi(p) if isinstance(p, str) else p for p in phis]
    rows = []
    first = {}
    for phi in phis:
        for j, t in enumerate(targets):
            if hasattr(t, "mesh") and hasattr(t, "degree"):
                val = lphi_norm(phi, t.mesh, t)
            else:
                arr = np.asarray(t, dtype=float)
                mu = DiscreteMeasure(weights) if weights is not None else None
                val = float(luxemburg_norm(phi, arr, mu))
            first.setdefault(j, val)
            ratio = val / first[j] if first[j] > 0 else (1.0 if val == 0 else math.inf)
            rows.append({"phi": phi.spec, "target": j, "norm": val, "ratio_to_first": ratio})
    return rows


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TABLE_COLUMNS)
    for r in rows:
        w.writerow([r["phi"], r["target"], repr(float(r["norm"])), repr(float(r["ratio_to_first"]))])
    return buf.getvalue()


def table_to_json(rows) -> str:
    return json.dumps({"schema": SCHEMA, "columns": list(TABLE_COLUMNS), "rows": _clean(rows)}, indent=2, sort_keys=True)
