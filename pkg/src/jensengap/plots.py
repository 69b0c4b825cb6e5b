"""Report figures for the CLI: bound curves, sweep comparisons, diagnostics.

Rendering is headless (Agg) and file-based; every helper takes the data it
plots plus a target path and returns the path it wrote.  Non-finite bound
values are simply absent from the curves — the data files, not the figures,
are the record of flags.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bounds import BoundReport
from .gallery import SweepRow
from .mc import McBoundEstimate
from .pacbayes import MixtureCurvePoint

__all__ = [
    "save_analytic_figure",
    "save_sweep_figure",
    "save_mc_figure",
    "save_modelavg_figure",
    "save_benchmark_figure",
]


def _finite(xs: Sequence[float], ys: Sequence[float]) -> tuple[list[float], list[float]]:
    pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    return [p[0] for p in pairs], [p[1] for p in pairs]


def save_analytic_figure(reports: Sequence[BoundReport], path: str | Path) -> Path:
    """Lower/upper bound values against order k, with the exact gap if known."""
    path = Path(path)
    ks = [r.k for r in reports]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(*_finite(ks, [r.lower for r in reports]), "o-", label="lower")
    ax.plot(*_finite(ks, [r.upper for r in reports]), "s-", label="upper")
    exacts = [r.exact for r in reports if r.exact is not None]
    if exacts:
        ax.axhline(exacts[0], color="k", ls="--", lw=1, label="exact")
    ax.set_xlabel("order k")
    ax.set_ylabel("gap bound")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_figure(rows: Sequence[SweepRow], path: str | Path) -> Path:
    """Comparison curves per order: our upper vs the baseline vs exact."""
    path = Path(path)
    ks = sorted({r.k for r in rows})
    fig, axes = plt.subplots(1, len(ks), figsize=(5 * len(ks), 4), squeeze=False)
    for ax, k in zip(axes[0], ks):
        sub = [r for r in rows if r.k == k]
        xs = [r.param1 for r in sub]
        ax.plot(*_finite(xs, [r.upper for r in sub]), label=f"upper (k={k})")
        ax.plot(*_finite(xs, [r.lower for r in sub]), label=f"lower (k={k})")
        ax.plot(*_finite(xs, [r.struski_upper for r in sub]), ls=":", label="baseline upper")
        ax.plot(*_finite(xs, [r.exact for r in sub]), "k--", lw=1, label="exact")
        ax.set_xlabel(sub[0].case.split("-")[0] + " parameter")
        ax.set_ylabel("gap")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_mc_figure(estimate: McBoundEstimate, path: str | Path) -> Path:
    """Histogram and normal Q-Q plot of the standardized log sample means."""
    path = Path(path)
    fig, (ax_h, ax_q) = plt.subplots(1, 2, figsize=(9, 4))
    if estimate.diagnostics is not None and estimate.diagnostics.qq_points:
        theo = np.array([p[0] for p in estimate.diagnostics.qq_points])
        emp = np.array([p[1] for p in estimate.diagnostics.qq_points])
        ax_h.hist(emp, bins=40, density=True, alpha=0.7)
        grid = np.linspace(-4, 4, 200)
        ax_h.plot(grid, np.exp(-0.5 * grid**2) / math.sqrt(2 * math.pi), "k--", lw=1)
        ax_q.plot(theo, emp, ".", ms=3)
        lim = [theo.min(), theo.max()]
        ax_q.plot(lim, lim, "k--", lw=1)
        ax_q.set_title(f"qq correlation {estimate.diagnostics.qq_correlation:.4f}")
    ax_h.set_xlabel("standardized log sample mean")
    ax_h.set_ylabel("density")
    ax_q.set_xlabel("normal quantile")
    ax_q.set_ylabel("empirical quantile")
    fig.suptitle(
        f"log-mean interval [{estimate.lower:.6g}, {estimate.upper:.6g}]  "
        f"(n={estimate.n_used}, m={estimate.m}, k={estimate.k})"
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_modelavg_figure(points: Sequence[MixtureCurvePoint], path: str | Path) -> Path:
    """Risk curve and its oracle upper bounds over the mixture parameter."""
    path = Path(path)
    rhos = [p.rho for p in points]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rhos, [p.ce for p in points], "k-", lw=2, label="cross-entropy")
    for k, _ in points[0].bounds:
        ax.plot(*_finite(rhos, [p.bound(k) for p in points]), label=f"bound k={k}")
    ax.set_xlabel("mixture weight on second model")
    ax.set_ylabel("risk")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_benchmark_figure(pair_records: Sequence[dict], path: str | Path) -> Path:
    """Q-Q correlation against interval miss distance across benchmark pairs."""
    path = Path(path)
    fig, (ax_s, ax_w) = plt.subplots(1, 2, figsize=(9, 4))
    hits = [r for r in pair_records if r["bracket"]]
    misses = [r for r in pair_records if not r["bracket"]]
    for group, marker, label in ((hits, "o", "bracketed"), (misses, "x", "missed")):
        if group:
            ax_s.plot(
                [r["mismatch"] for r in group],
                [r["qq_correlation"] for r in group],
                marker,
                ls="",
                label=f"{label} ({len(group)})",
            )
    ax_s.set_xscale("log", base=2)
    ax_s.set_xlabel("encoder variance mismatch")
    ax_s.set_ylabel("qq correlation of log means")
    ax_s.legend(fontsize=8)
    widths = [(r["width"], r["struski_width"]) for r in pair_records
              if math.isfinite(r["width"]) and math.isfinite(r["struski_width"])]
    if widths:
        ours, base = zip(*widths)
        ax_w.plot(base, ours, ".", ms=4)
        lim = [0, max(max(ours), max(base))]
        ax_w.plot(lim, lim, "k--", lw=1)
    ax_w.set_xlabel("baseline interval width")
    ax_w.set_ylabel("our interval width")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
