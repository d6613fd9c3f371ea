"""Figures for verification reports and norm tables (written to files)."""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "figure.figsize": (6.0, 3.6),
    "font.size": 9,
    "axes.linewidth": 0.6,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}

# values are drawn on a log axis; exact zeros sit at this floor
_FLOOR = 1e-18


def _log(x):
    x = float(x)
    if not math.isfinite(x):
        return 20.0
    return math.log10(max(abs(x), _FLOOR))


def plot_report(report, path) -> Path:
    """Horizontal bars of log10(value) per check with the tolerance marked."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    checks = report.checks
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 0.35 * max(len(checks), 2) + 1.0))
        ys = range(len(checks))
        vals = [_log(c.value) for c in checks]
        tols = [_log(c.tolerance) for c in checks]
        colors = ["#4c72b0" if c.passed else "#c44e52" for c in checks]
        ax.barh(list(ys), [v - math.log10(_FLOOR) for v in vals], left=math.log10(_FLOOR), color=colors, height=0.6)
        ax.scatter(tols, list(ys), marker="|", s=200, color="k", zorder=3, label="tolerance")
        ax.set_yticks(list(ys))
        ax.set_yticklabels([c.id for c in checks])
        ax.invert_yaxis()
        ax.set_xlabel("log10 value")
        ax.set_title(f"{report.suite}: {'pass' if report.passed else 'FAIL'}")
        ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0), frameon=False)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_norm_table(rows, path) -> Path:
    """Grouped bars of norms per target, one colour per Young function."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    phis = list(dict.fromkeys(r["phi"] for r in rows))
    targets = sorted({r["target"] for r in rows})
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        width = 0.8 / max(len(phis), 1)
        for i, phi in enumerate(phis):
            vals = {r["target"]: r["norm"] for r in rows if r["phi"] == phi}
            xs = [t + i * width for t in targets]
            ax.bar(xs, [vals.get(t, 0.0) for t in targets], width=width, label=phi)
        ax.set_xticks([t + 0.4 - width / 2 for t in targets])
        ax.set_xticklabels([str(t) for t in targets])
        ax.set_xlabel("target")
        ax.set_ylabel("norm")
        if phis:
            ax.legend(frameon=False, fontsize=7)
        fig.savefig(path)
        plt.close(fig)
    return path
