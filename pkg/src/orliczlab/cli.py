"""Command-line entry point.

Exit status: 0 when every check passes, 1 when a check fails or a numerical
breakdown occurs, 2 on usage errors (bad flags, unknown meshes or Young
function specs).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import nullcontext
from pathlib import Path

from threadpoolctl import threadpool_limits

from .errors import OrliczLabError, SpecError
from .orlicz import DiscreteMeasure, luxemburg
from .reports import SUITES, _clean, emit_norm_table, run_suite, table_to_csv, table_to_json
from .young import parse_phi


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise SpecError(f"expected comma-separated numbers, got {text!r}") from None


def _common(p: argparse.ArgumentParser, mesh=True, degree=True):
    if mesh:
        p.add_argument("--mesh", help="generator name (e.g. torus:m=8) or mesh JSON file")
    p.add_argument("--phi", help="Young function spec, e.g. power:p=2")
    if degree:
        p.add_argument("--degree", type=int)
    p.add_argument("--refine", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--figures", metavar="DIR", help="also render figures into DIR")
    p.add_argument("--timing", action="store_true", help="include wall-clock timing in JSON output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orliczlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    orl = sub.add_parser("orlicz", help="Orlicz norm utilities")
    orl_sub = orl.add_subparsers(dest="action", required=True)
    norm = orl_sub.add_parser("norm", help="Luxemburg norm of a weighted vector")
    norm.add_argument("--phi", required=True)
    norm.add_argument("--values", required=True, help="comma-separated values")
    norm.add_argument("--weights", help="comma-separated positive weights (default: counting measure)")
    norm.add_argument("--tol", type=float, default=1e-12)

    ver = sub.add_parser("verify", help="run one verification with a compact JSON result")
    ver_sub = ver.add_subparsers(dest="target", required=True)
    vp = ver_sub.add_parser("poincare")
    vp.add_argument("--dim", type=int, choices=(2, 3), default=2)
    _common(vp, mesh=False)
    vb = ver_sub.add_parser("bicomplex")
    _common(vb)

    run = sub.add_parser("run", help="run a verification suite")
    run.add_argument("suite", choices=SUITES)
    run.add_argument("--dim", type=int, choices=(2, 3))
    run.add_argument("--trials", type=int)
    _common(run)

    tab = sub.add_parser("table", help="norm table across Young functions")
    tab.add_argument("--phi", action="append", default=[], help="repeatable")
    tab.add_argument("--values", action="append", default=[], help="repeatable comma-separated vector")
    tab.add_argument("--weights")
    tab.add_argument("--out")
    tab.add_argument("--format", choices=("json", "csv"), default="csv")
    tab.add_argument("--figures", metavar="DIR")

    msh = sub.add_parser("mesh", help="mesh statistics, optionally exported as JSON")
    msh.add_argument("--mesh", required=True)
    msh.add_argument("--refine", type=int, default=0)
    msh.add_argument("--out")
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _report_output(report, args, flatten: bool) -> int:
    if args.format == "csv":
        text = report.to_csv()
    elif flatten:
        payload = dict(report.data)
        payload.update({k: v for k, v in report.to_dict(args.timing).items() if k != "data"})
        text = json.dumps(_clean(payload), indent=2, sort_keys=True)
    else:
        text = report.to_json(include_timing=args.timing)
    _emit(text, args.out)
    if args.figures:
        from .plotting import plot_report

        plot_report(report, Path(args.figures) / f"{report.suite}_checks.png")
    return 0 if report.passed else 1


def _config(args, **extra) -> dict:
    cfg = {k: getattr(args, k, None) for k in ("mesh", "phi", "degree", "refine", "seed", "dim", "trials")}
    cfg.update(extra)
    return {k: v for k, v in cfg.items() if v is not None}


def _dispatch(args) -> int:
    if args.command == "orlicz":
        phi = parse_phi(args.phi)
        values = _floats(args.values)
        weights = _floats(args.weights) if args.weights else [1.0] * len(values)
        res = luxemburg(phi, values, DiscreteMeasure(weights), args.tol)
        _emit(json.dumps({"norm": res.norm, "modular_at_norm": res.modular_at_norm, "iterations": res.iterations}, sort_keys=True), None)
        return 0
    if args.command == "verify":
        if args.target == "poincare":
            report = run_suite("poincare", _config(args))
        else:
            report = run_suite("bicomplex", _config(args))
        return _report_output(report, args, flatten=True)
    if args.command == "run":
        report = run_suite(args.suite, _config(args))
        return _report_output(report, args, flatten=False)
    if args.command == "table":
        vectors = [_floats(v) for v in args.values]
        rows = emit_norm_table(args.phi, vectors, _floats(args.weights) if args.weights else None)
        _emit(table_to_csv(rows) if args.format == "csv" else table_to_json(rows), args.out)
        if args.figures:
            from .plotting import plot_norm_table

            plot_norm_table(rows, Path(args.figures) / "norm_table.png")
        return 0
    if args.command == "mesh":
        from .mesh import load_mesh

        mesh = load_mesh(args.mesh, args.refine)
        if args.out:
            _emit(json.dumps(mesh.to_json()), args.out)
        _emit(json.dumps(_clean({"name": mesh.name, **mesh.stats()}), sort_keys=True), None)
        return 0
    raise SpecError(f"unknown command {args.command!r}")  # pragma: no cover


def _thread_limit():
    raw = os.environ.get("ORLICZLAB_THREADS")
    if not raw:
        return nullcontext()
    try:
        n = int(raw)
    except ValueError:
        raise SpecError(f"ORLICZLAB_THREADS must be an integer, got {raw!r}") from None
    return threadpool_limits(limits=max(1, n))


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with _thread_limit():
            return _dispatch(args)
    except (SpecError, FileNotFoundError) as exc:
        print(f"orliczlab: error: {exc}", file=sys.stderr)
        return 2
    except OrliczLabError as exc:
        print(f"orliczlab: failure: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
