"""Desk-scale experiment drivers: eigenvalue decay slopes for Matern kernels
on the disk, eigenvalue-sum gaps, Brownian bridge power-function decay
against the optimal-subspace values, and eigencouple convergence.

Every run returns a report object that serializes to a CSV table plus a
JSON sidecar of scalars, reloads exactly, and carries the pass/fail
outcomes of the checks it declares.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .eigensolve import eigenfunction_values, eigs_direct, eigs_newton
from .errors import IllConditionedGramianError
from .gramians import assemble_pencil, cholesky_spd, newton_l2_gramian
from .kernels import BrownianBridgeKernel, MaternKernel, bb_eigenvalue
from .newton import greedy_select, power_l2_norm
from .pointsets import disk_grid, random_interval_points

__all__ = [
    "FitResult",
    "DecayReport",
    "PowerDecayReport",
    "EigencoupleReport",
    "GreedyTraceReport",
    "fit_decay_rate",
    "matern_greedy_run",
    "run_matern_decay",
    "run_matern_sum_gap",
    "run_bb_power_decay",
    "run_bb_eigencouples",
    "run_greedy_trace",
    "save_report",
    "load_report",
]

ORACLE_SLACK = 1e-6  # lower-bound slack for power-vs-oracle comparisons
GAP_FLOOR = -1e-10  # eigenvalue gaps below this flag instability
SLOPE_TOL = 0.25
EVAL_GRID_SIZE = 1001  # eigenfunction-error grid on [0, 1]

# Inverse length scale used by the disk experiments.  At this scale the
# [10, n/2] fit window of a 200-point greedy run sits in the decay regime
# of the spectrum, so the fitted slopes track the Sobolev rates.
DEFAULT_MATERN_SCALE = 3.0


class FitResult(NamedTuple):
    slope: float
    n_used: int
    n_excluded: int


def fit_decay_rate(xs, ys, window):
    """Least-squares slope of log(ys) against log(xs) over an x-window.

    ``window`` is an inclusive (lo, hi) range in x units.  Nonpositive ys
    inside the window are excluded and counted; fewer than two surviving
    points is an error.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    lo, hi = window
    inside = (xs >= lo) & (xs <= hi)
    usable = inside & (ys > 0.0)
    n_excluded = int(inside.sum() - usable.sum())
    if usable.sum() < 2:
        raise ValueError(f"fit window {window} keeps {int(usable.sum())} positive points; need >= 2")
    slope = np.polyfit(np.log(xs[usable]), np.log(ys[usable]), 1)[0]
    return FitResult(slope=float(slope), n_used=int(usable.sum()), n_excluded=n_excluded)


# ---------------------------------------------------------------------------
# report containers
# ---------------------------------------------------------------------------


@dataclass
class DecayReport:
    """Log-log decay measurement against a reference slope."""

    xs: np.ndarray
    ys: np.ndarray
    fit_slope: float
    fit_window: tuple
    reference_slope: float
    tolerance: float
    passed: bool
    n_excluded: int = 0
    trace_residual: float = np.nan
    meta: dict = field(default_factory=dict)

    label = "decay"

    def table(self):
        return {"x": self.xs, "y": self.ys}

    def scalars(self):
        return {
            "fit_slope": self.fit_slope,
            "fit_window": list(self.fit_window),
            "reference_slope": self.reference_slope,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "n_excluded": self.n_excluded,
            "trace_residual": self.trace_residual,
            "meta": self.meta,
        }

    @property
    def checks(self):
        return {"slope_within_tolerance": self.passed}


@dataclass
class PowerDecayReport:
    """Power-function decay of direct and greedy subspaces vs the optima."""

    ns: np.ndarray
    direct: np.ndarray
    greedy_linf: np.ndarray
    greedy_l2: np.ndarray
    oracle_subspace: np.ndarray
    oracle_true: np.ndarray
    negative: dict  # method -> bool array marking negative squared power
    checks: dict
    trace_residual: float
    meta: dict = field(default_factory=dict)

    label = "bb-power"

    def table(self):
        cols = {
            "n": self.ns,
            "direct": self.direct,
            "greedy_linf": self.greedy_linf,
            "greedy_l2": self.greedy_l2,
            "oracle_subspace": self.oracle_subspace,
            "oracle_true": self.oracle_true,
        }
        for method in ("direct", "greedy_linf", "greedy_l2"):
            cols[f"{method}_negative"] = self.negative[method].astype(int)
        return cols

    def scalars(self):
        return {"checks": self.checks, "trace_residual": self.trace_residual, "meta": self.meta}


@dataclass
class EigencoupleReport:
    """Per-index eigenvalue and eigenfunction approximation errors."""

    js: np.ndarray
    lambda_approx: np.ndarray
    lambda_exact: np.ndarray
    gap: np.ndarray
    eigenfunction_error: np.ndarray
    checks: dict
    trace_residual: float
    meta: dict = field(default_factory=dict)

    label = "bb-eigs"

    def table(self):
        return {
            "j": self.js,
            "lambda_jn": self.lambda_approx,
            "lambda_exact": self.lambda_exact,
            "gap": self.gap,
            "eigenfunction_error": self.eigenfunction_error,
        }

    def scalars(self):
        return {"checks": self.checks, "trace_residual": self.trace_residual, "meta": self.meta}


@dataclass
class GreedyTraceReport:
    """Step-by-step greedy selection trace."""

    steps: np.ndarray
    candidate_index: np.ndarray
    coords: np.ndarray  # (n, d)
    score: np.ndarray
    residual_max: np.ndarray
    checks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    label = "greedy-trace"

    def table(self):
        cols = {"step": self.steps, "candidate_index": self.candidate_index}
        for axis in range(self.coords.shape[1]):
            cols[f"x{axis}"] = self.coords[:, axis]
        cols["score"] = self.score
        cols["residual_max"] = self.residual_max
        return cols

    def scalars(self):
        return {"checks": self.checks, "meta": self.meta}


# ---------------------------------------------------------------------------
# Matern experiments on the unit disk
# ---------------------------------------------------------------------------


@dataclass
class MaternGreedyRun:
    """Shared state between the decay and sum-gap reports for one order."""

    kernel: MaternKernel
    quad: object
    basis: object
    gramian: np.ndarray
    eigen: object


def matern_greedy_run(beta, grid_m=10_000, n=200, scale=DEFAULT_MATERN_SCALE):
    """Greedy sup-norm selection on the disk grid plus the discrete eigensolve."""
    kernel = MaternKernel(beta, scale=scale)
    quad = disk_grid(grid_m)
    basis = greedy_select(kernel, quad, n, criterion="linf")
    gramian = newton_l2_gramian(basis, quad, mode="discrete")
    eigen = eigs_newton(basis, gramian)
    return MaternGreedyRun(kernel=kernel, quad=quad, basis=basis, gramian=gramian, eigen=eigen)


def _discrete_trace_residual(run):
    total = run.kernel.trace()
    power_sq = power_l2_norm(run.basis, run.quad).norm ** 2
    return abs(run.eigen.eigenvalues.sum() + power_sq - total) / total


def run_matern_decay(beta, grid_m=10_000, n=200, run=None):
    """Slope of the discrete eigenvalues lambda_{j,n} against the Sobolev rate.

    Greedy sup-norm selection of ``n`` points on a disk grid of about
    ``grid_m`` nodes; the fitted log-log slope over j in [10, n/2] is
    compared with -(beta + 2) / 2.
    """
    run = run if run is not None else matern_greedy_run(beta, grid_m, n)
    lam = run.eigen.eigenvalues
    js = np.arange(1, len(lam) + 1)
    window = (10, max(len(lam) // 2, 12))
    fit = fit_decay_rate(js, lam, window)
    reference = -(beta + 2) / 2
    return DecayReport(
        xs=js,
        ys=lam,
        fit_slope=fit.slope,
        fit_window=window,
        reference_slope=reference,
        tolerance=SLOPE_TOL,
        passed=bool(abs(fit.slope - reference) <= SLOPE_TOL),
        n_excluded=fit.n_excluded,
        trace_residual=float(_discrete_trace_residual(run)),
        meta={
            "experiment": "matern-decay",
            "kernel": run.kernel.kernel_id,
            "beta": beta,
            "grid_m": grid_m,
            "m": run.quad.size,
            "n": int(run.basis.n),
            "criterion": "linf",
            "breakdown": bool(run.basis.breakdown),
        },
    )


def run_matern_sum_gap(beta, grid_m=10_000, n=200, run=None):
    """Decay of the eigenvalue-sum gap pi - sum_j lambda_{j,k} along the greedy
    sequence.

    The gap equals the squared discrete L2 power norm after k points, so it
    comes straight from the recorded residual sums.  The fitted slope is
    compared against the proven -beta/2 and the empirically observed
    -(beta + 1)/2 rates; the pass interval spans both with slack.
    """
    run = run if run is not None else matern_greedy_run(beta, grid_m, n)
    gaps = run.quad.weight * run.basis.residual_sum_history
    ks = np.arange(1, len(gaps) + 1)
    window = (10, max(len(gaps) // 2, 12))
    fit = fit_decay_rate(ks, gaps, window)
    proven = -beta / 2
    observed = -(beta + 1) / 2
    lo, hi = -(beta + 2) / 2 - SLOPE_TOL, -beta / 2 + SLOPE_TOL
    return DecayReport(
        xs=ks,
        ys=gaps,
        fit_slope=fit.slope,
        fit_window=window,
        reference_slope=observed,
        tolerance=SLOPE_TOL,
        passed=bool(lo <= fit.slope <= hi),
        n_excluded=fit.n_excluded,
        trace_residual=float(_discrete_trace_residual(run)),
        meta={
            "experiment": "matern-gap",
            "kernel": run.kernel.kernel_id,
            "beta": beta,
            "grid_m": grid_m,
            "m": run.quad.size,
            "n": int(run.basis.n),
            "criterion": "linf",
            "breakdown": bool(run.basis.breakdown),
            "proven_slope": proven,
            "observed_slope": observed,
            "slope_interval": [lo, hi],
            "closer_to_observed": bool(abs(fit.slope - observed) < abs(fit.slope - proven)),
            "min_gap": float(gaps.min()),
        },
    )


# ---------------------------------------------------------------------------
# Brownian bridge experiments on (0, 1)
# ---------------------------------------------------------------------------


def _exact_power_curve(total, prefix_l2_norms_sq):
    """Power norms sqrt(total - cumsum) with negatives flagged and blanked."""
    vals = total - np.cumsum(prefix_l2_norms_sq)
    negative = vals < 0.0
    curve = np.sqrt(np.clip(vals, 0.0, None))
    curve[negative] = np.nan
    return curve, negative


def _pencil_trace(pair):
    """trace(A^{-1} B) via the Cholesky factor of A."""
    L = cholesky_spd(pair.A, label="kernel matrix")
    W = solve_triangular(L, pair.B, lower=True)
    G = solve_triangular(L, W.T, lower=True)
    return float(np.trace(G))


def _bb_exact_trace_residual(kernel, basis, lam_sum):
    """Relative residual of sum(lambda_{j,n}) + ||P_n||^2 = total, with the
    power term taken from the translate pencil instead of the Newton route."""
    total = kernel.trace()
    pair = assemble_pencil(kernel, basis.points, quad=None, mode="exact")
    power_sq = total - _pencil_trace(pair)
    return abs(lam_sum + power_sq - total) / total


def run_bb_power_decay(beta, eps=0.0, N=500, n=50, seed=0):
    """Power-function decay on random interval points: direct vs greedy.

    Selection uses discrete inner products on the candidate set; the
    reported curves use exact L2 Gramians from the squared expansion.  The
    direct pencil is expected to degrade for beta >= 2: failures and
    negative squared power values are flagged, not masked.
    """
    kernel = BrownianBridgeKernel(beta, eps)
    quad = random_interval_points(N, seed)
    total = kernel.trace()
    # Row n = 0 is the empty subspace: every curve starts at sqrt(total).
    ns = np.arange(0, n + 1)

    lam_true_partial = np.concatenate([[0.0], np.cumsum(bb_eigenvalue(beta, eps, ns[1:]))])
    oracle_true = np.sqrt(np.clip(total - lam_true_partial, 0.0, None))

    nan = np.full(n + 1, np.nan)
    negative = {m: np.zeros(n + 1, dtype=bool) for m in ("direct", "greedy_linf", "greedy_l2")}
    meta = {
        "experiment": "bb-power",
        "kernel": "bb",
        "beta": beta,
        "eps": eps,
        "N": N,
        "n": n,
        "seed": seed,
        "total_trace": total,
    }

    direct = nan.copy()
    oracle_subspace = nan.copy()
    try:
        pair = assemble_pencil(kernel, quad.points, quad, mode="exact")
        full = eigs_direct(pair, points=quad.points)
        curve, neg = _exact_power_curve(total, full.eigenvalues[:n])
        direct[0] = np.sqrt(total)
        direct[1:] = curve
        negative["direct"][1:] = neg
        # The first-n optimal subspace of the translate space has exactly
        # this power norm, so the oracle column coincides with the curve.
        oracle_subspace = direct.copy()
        meta["direct_unstable_eigenvalues"] = int(full.unstable.sum())
        meta["direct_failed"] = False
    except IllConditionedGramianError as err:
        meta["direct_failed"] = True
        meta["direct_error"] = str(err)
        meta["direct_minor_index"] = err.minor_index

    curves = {}
    trace_residual = np.nan
    for criterion in ("linf", "l2"):
        key = f"greedy_{criterion}"
        basis = greedy_select(kernel, quad, n, criterion=criterion)
        gram = newton_l2_gramian(basis, quad, mode="exact")
        curve, neg = _exact_power_curve(total, np.diag(gram))
        padded = nan.copy()
        padded[0] = np.sqrt(total)
        padded[1 : 1 + len(curve)] = curve
        negative[key][1 : 1 + len(neg)] = neg
        curves[key] = padded
        meta[f"{key}_achieved_n"] = int(basis.n)
        meta[f"{key}_breakdown"] = bool(basis.breakdown)
        if criterion == "linf":
            lam_sum = float(np.trace(gram))
            trace_residual = float(_bb_exact_trace_residual(kernel, basis, lam_sum))

    instability = bool(
        meta.get("direct_failed", False)
        or meta.get("direct_unstable_eigenvalues", 0) > 0
        or any(v.any() for v in negative.values())
        or meta.get("greedy_linf_breakdown", False)
        or meta.get("greedy_l2_breakdown", False)
    )
    meta["instability_flagged"] = instability

    checks = {}
    for key in ("greedy_linf", "greedy_l2"):
        valid = ~np.isnan(curves[key])
        above = bool(np.all(curves[key][valid] >= oracle_true[valid] - ORACLE_SLACK))
        # index of subspace size k in every array is k itself
        span = np.arange(min(5, n), min(n, 50) + 1)
        ok = valid[span] & (curves[key][span] <= oracle_true[span // 2] + ORACLE_SLACK)
        fraction = float(ok.sum() / len(span)) if len(span) else np.nan
        meta[f"{key}_envelope_fraction"] = fraction
        meta[f"{key}_within_envelope"] = bool(len(span) and fraction >= 0.8)
        if beta <= 3:
            checks[f"{key}_above_oracle"] = above
        else:
            meta[f"{key}_above_oracle"] = above
    if beta == 1 and eps == 0:
        # Envelope behavior is asserted only for the rough bridge kernel,
        # where the greedy subspace tracks the optimum closely.
        checks["greedy_linf_within_envelope"] = meta["greedy_linf_within_envelope"]
    if beta >= 4:
        checks["instability_flagged"] = instability

    return PowerDecayReport(
        ns=ns,
        direct=direct,
        greedy_linf=curves["greedy_linf"],
        greedy_l2=curves["greedy_l2"],
        oracle_subspace=oracle_subspace,
        oracle_true=oracle_true,
        negative=negative,
        checks=checks,
        trace_residual=trace_residual,
        meta=meta,
    )


def run_bb_eigencouples(
    beta, eps=0.0, N=100, n=50, seed=0, criterion="linf", method="newton", gramian="exact"
):
    """Eigencouple convergence against the known bridge eigensystem.

    Reports, for each index j: the discrete eigenvalue, the exact one, the
    gap (nonnegative up to round-off by the restriction inequality), and
    the L2 error of |sqrt(lambda) phi| on a fresh evaluation grid.  The
    eigensolve route and Gramian mode are selectable; the restriction
    inequality is only declared as a check for the exact Gramian, where it
    holds exactly instead of up to quadrature error.
    """
    kernel = BrownianBridgeKernel(beta, eps)
    quad = random_interval_points(N, seed)
    basis = greedy_select(kernel, quad, n, criterion=criterion)
    if method == "newton":
        gram = newton_l2_gramian(basis, quad, mode=gramian)
        eigen = eigs_newton(basis, gram)
    elif method == "direct":
        pair = assemble_pencil(kernel, basis.points, quad, mode=gramian)
        gram = pair.B
        eigen = eigs_direct(pair, points=basis.points)
    else:
        raise ValueError(f"unknown method {method!r}")

    achieved = basis.n
    js = np.arange(1, achieved + 1)
    lam = eigen.eigenvalues
    lam_exact = bb_eigenvalue(beta, eps, js)
    gap = lam_exact - lam

    grid = np.linspace(0.0, 1.0, EVAL_GRID_SIZE)
    approx_vals = eigenfunction_values(eigen, basis, grid)
    j_col = js[:, None]
    exact_vals = np.sqrt(lam_exact)[:, None] * np.sqrt(2.0) * np.sin(j_col * np.pi * grid[None, :])
    diff = np.abs(approx_vals) - np.abs(exact_vals)
    ef_error = np.sqrt((diff**2).mean(axis=1))

    lam_sum = float(lam.sum())
    if gramian == "exact":
        trace_residual = float(_bb_exact_trace_residual(kernel, basis, lam_sum))
    else:
        power_sq = power_l2_norm(basis, quad).norm ** 2
        total = kernel.trace()
        trace_residual = abs(lam_sum + power_sq - total) / total

    instability = bool(basis.breakdown or eigen.any_unstable or np.any(lam <= 0.0))
    if beta > 3:
        checks = {"instability_flagged": instability}
    elif gramian == "exact":
        checks = {
            "gap_nonnegative": bool(np.all(gap >= GAP_FLOOR)),
            "eigenvalues_positive": bool(np.all(lam > 0.0)),
        }
    else:
        checks = {}
    meta = {
        "experiment": "bb-eigs",
        "kernel": "bb",
        "beta": beta,
        "eps": eps,
        "N": N,
        "n": n,
        "achieved_n": int(achieved),
        "seed": seed,
        "criterion": criterion,
        "method": method,
        "gramian": gramian,
        "breakdown": bool(basis.breakdown),
        "instability_flagged": instability,
        "eval_grid_size": EVAL_GRID_SIZE,
    }
    return EigencoupleReport(
        js=js,
        lambda_approx=lam,
        lambda_exact=lam_exact,
        gap=gap,
        eigenfunction_error=ef_error,
        checks=checks,
        trace_residual=trace_residual,
        meta=meta,
    )


def run_greedy_trace(kernel, candidates, n, criterion="linf"):
    """Greedy selection trace: step, chosen candidate, score, max residual."""
    basis = greedy_select(kernel, candidates, n, criterion=criterion)
    return GreedyTraceReport(
        steps=np.arange(1, basis.n + 1),
        candidate_index=basis.indices.copy(),
        coords=basis.points.copy(),
        score=basis.selection_scores.copy(),
        residual_max=basis.residual_max_history.copy(),
        checks={},
        meta={
            "experiment": "greedy-trace",
            "kernel": getattr(kernel, "kernel_id", type(kernel).__name__),
            "criterion": criterion,
            "n": n,
            "achieved_n": int(basis.n),
            "breakdown": bool(basis.breakdown),
            "m": candidates.size,
        },
    )


# ---------------------------------------------------------------------------
# CSV + JSON persistence
# ---------------------------------------------------------------------------

_REPORT_TYPES = {
    "decay": DecayReport,
    "bb-power": PowerDecayReport,
    "bb-eigs": EigencoupleReport,
    "greedy-trace": GreedyTraceReport,
}


def _format_cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    return obj


def save_report(report, path):
    """Write the report table as CSV and its scalars as a JSON sidecar.

    ``path`` names the CSV file; the sidecar lands next to it with a
    ``.meta.json`` suffix.  Floats are written in shortest round-trip form.
    """
    path = Path(path)
    table = report.table()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(table.keys())
        for row in zip(*table.values()):
            writer.writerow([_format_cell(v) for v in row])
    sidecar = {"label": report.label, "scalars": _jsonable(report.scalars())}
    with open(path.with_suffix(".meta.json"), "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _read_table(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    cols = {}
    for i, name in enumerate(header):
        raw = [row[i] for row in data]
        if all(("." not in c and "n" not in c and "e" not in c) for c in raw):
            cols[name] = np.array([int(c) for c in raw])
        else:
            cols[name] = np.array([float(c) for c in raw])
    return cols


def load_report(path):
    """Rebuild a report from its CSV table and JSON sidecar."""
    path = Path(path)
    cols = _read_table(path)
    with open(path.with_suffix(".meta.json")) as fh:
        sidecar = json.load(fh)
    label = sidecar["label"]
    scalars = sidecar["scalars"]

    def _num(v):
        return float(v) if isinstance(v, str) else v

    if label == "decay":
        return DecayReport(
            xs=cols["x"],
            ys=cols["y"],
            fit_slope=_num(scalars["fit_slope"]),
            fit_window=tuple(scalars["fit_window"]),
            reference_slope=_num(scalars["reference_slope"]),
            tolerance=_num(scalars["tolerance"]),
            passed=scalars["passed"],
            n_excluded=scalars["n_excluded"],
            trace_residual=_num(scalars["trace_residual"]),
            meta=scalars["meta"],
        )
    if label == "bb-power":
        negative = {
            m: cols[f"{m}_negative"].astype(bool) for m in ("direct", "greedy_linf", "greedy_l2")
        }
        return PowerDecayReport(
            ns=cols["n"],
            direct=cols["direct"],
            greedy_linf=cols["greedy_linf"],
            greedy_l2=cols["greedy_l2"],
            oracle_subspace=cols["oracle_subspace"],
            oracle_true=cols["oracle_true"],
            negative=negative,
            checks=scalars["checks"],
            trace_residual=_num(scalars["trace_residual"]),
            meta=scalars["meta"],
        )
    if label == "bb-eigs":
        return EigencoupleReport(
            js=cols["j"],
            lambda_approx=cols["lambda_jn"],
            lambda_exact=cols["lambda_exact"],
            gap=cols["gap"],
            eigenfunction_error=cols["eigenfunction_error"],
            checks=scalars["checks"],
            trace_residual=_num(scalars["trace_residual"]),
            meta=scalars["meta"],
        )
    if label == "greedy-trace":
        axes = sorted(k for k in cols if k.startswith("x") and k[1:].isdigit())
        return GreedyTraceReport(
            steps=cols["step"],
            candidate_index=cols["candidate_index"],
            coords=np.column_stack([cols[a] for a in axes]),
            score=cols["score"],
            residual_max=cols["residual_max"],
            checks=scalars["checks"],
            meta=scalars["meta"],
        )
    raise ValueError(f"unknown report label {label!r}")


def report_passed(report):
    """True when every boolean check the run declares holds."""
    checks = getattr(report, "checks", {})
    return all(bool(v) for k, v in checks.items() if isinstance(v, (bool, np.bool_)))
