"""Figure rendering for experiment reports.

Each report type gets a log-scale matplotlib figure written next to its
CSV table.  Rendering is headless (Agg) and purely a view of the report:
nothing here feeds back into the computations.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["render_report"]


def _reference_line(ax, xs, ys, slope, label, style="k--"):
    """Dashed power-law guide anchored to the first plotted point."""
    pos = (ys > 0) & np.isfinite(ys)
    if not pos.any():
        return
    x0, y0 = xs[pos][0], ys[pos][0]
    guide = y0 * (xs / x0) ** slope
    ax.plot(xs, guide, style, linewidth=1.0, label=label)


def _render_decay(report, ax):
    ax.loglog(report.xs, report.ys, "-", label="measured")
    _reference_line(ax, report.xs, report.ys, report.reference_slope,
                    f"slope {report.reference_slope:g}")
    proven = report.meta.get("proven_slope")
    if proven is not None:
        _reference_line(ax, report.xs, report.ys, proven, f"slope {proven:g}", style="k:")
    lo, hi = report.fit_window
    ax.axvspan(lo, hi, color="0.9", zorder=0)
    experiment = report.meta.get("experiment", "decay")
    beta = report.meta.get("beta")
    ax.set_title(f"{experiment} (beta={beta}, fitted slope {report.fit_slope:.3f})")
    ax.set_xlabel("index" if experiment == "matern-decay" else "points")
    ax.set_ylabel("eigenvalue" if experiment == "matern-decay" else "eigenvalue-sum gap")
    ax.legend()


def _render_power(report, ax):
    for key, style in (("direct", "C0-"), ("greedy_linf", "C1-"), ("greedy_l2", "C2-")):
        ax.semilogy(report.ns, getattr(report, key), style, label=key.replace("_", " "))
    ax.semilogy(report.ns, report.oracle_true, "k--", label="optimal")
    ax.set_title(
        "power-function decay (beta={beta}, eps={eps:g})".format(
            beta=report.meta.get("beta"), eps=float(report.meta.get("eps", 0.0))
        )
    )
    ax.set_xlabel("subspace dimension")
    ax.set_ylabel("L2 norm of the power function")
    ax.legend()


def _render_eigencouples(report, axes):
    left, right = axes
    left.semilogy(report.js, report.lambda_exact, "k--", label="exact")
    left.semilogy(report.js, np.clip(report.lambda_approx, 0, None), "C0.", label="computed")
    left.set_xlabel("index")
    left.set_ylabel("eigenvalue")
    left.legend()
    right.semilogy(report.js, report.eigenfunction_error, "C1.-")
    right.set_xlabel("index")
    right.set_ylabel("eigenfunction error")
    beta = report.meta.get("beta")
    left.set_title(f"eigenvalues (beta={beta})")
    right.set_title("eigenbasis error")


def _render_trace(report, axes):
    left, right = axes
    if report.coords.shape[1] == 2:
        sc = left.scatter(report.coords[:, 0], report.coords[:, 1], c=report.steps, s=12)
        left.set_aspect("equal")
        plt.colorbar(sc, ax=left, label="step")
    else:
        left.plot(report.coords[:, 0], report.steps, "C0.")
        left.set_ylabel("step")
        left.set_xlabel("point")
    left.set_title("selected points")
    right.semilogy(report.steps, report.residual_max, "C1-")
    right.set_xlabel("step")
    right.set_ylabel("max residual")
    right.set_title("power decay during selection")


def render_report(report, path):
    """Render the figure matching the report type to ``path`` (PNG)."""
    path = Path(path)
    if report.label in ("bb-eigs", "greedy-trace"):
        fig, axes = plt.subplots(1, 2, figsize=(9.6, 4.2))
    else:
        fig, axes = plt.subplots(figsize=(6.4, 4.8))
    if report.label == "decay":
        _render_decay(report, axes)
    elif report.label == "bb-power":
        _render_power(report, axes)
    elif report.label == "bb-eigs":
        _render_eigencouples(report, axes)
    elif report.label == "greedy-trace":
        _render_trace(report, axes)
    else:
        raise ValueError(f"no renderer for report label {report.label!r}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
