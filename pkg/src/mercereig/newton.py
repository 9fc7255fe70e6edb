"""Incremental Newton basis over a candidate set and greedy point selection.

The Newton basis is the value-triangular, natively orthonormal basis of the
translate space on the selected points; building it column by column is a
matrix-free pivoted Cholesky of the kernel matrix.  The residual vector it
tracks is the squared power function at the candidates, which drives both
greedy criteria (max residual for the sup-norm rule, discrete L2 norm of
the tentative next basis function for the L2 rule).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.linalg import solve_triangular

from .errors import GreedyBreakdownError
from .kernels import as_points
from .pointsets import QuadratureSet

__all__ = ["NewtonBasis", "empty_basis", "newton_extend", "greedy_select", "power_l2_norm", "PowerL2"]

# Residual below BREAKDOWN_REL times the largest candidate diagonal stops
# the selection: beyond it, dividing by sqrt(residual) amplifies noise.
BREAKDOWN_REL = 1e-13

# Candidate counts up to this limit precompute the full candidate kernel
# matrix (m^2 doubles); the L2 criterion requires the cached matrix.
_CACHE_LIMIT = 6000


@dataclass(frozen=True)
class NewtonBasis:
    """Newton basis state over a fixed candidate set.

    ``values[i, j]`` holds v_i at candidate j, ``residual[j]`` the squared
    power function at candidate j.  ``breakdown`` marks a selection that
    stopped before reaching its target size.
    """

    kernel: object
    candidate_points: np.ndarray  # (m, d)
    indices: np.ndarray  # (n,) into candidates, selection order
    values: np.ndarray  # (n, m)
    residual: np.ndarray  # (m,)
    diag_scale: float
    breakdown: bool = False
    selection_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual_max_history: np.ndarray = field(default_factory=lambda: np.zeros(0))
    residual_sum_history: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n(self):
        return len(self.indices)

    @property
    def points(self):
        """Selected points, in selection order."""
        return self.candidate_points[self.indices]

    @property
    def triangular(self):
        """Lower-triangular N with N[k, i] = v_i(x_k); satisfies N N^T = A."""
        return self.values[:, self.indices].T

    def evaluate_basis(self, X):
        """Values of all basis functions at arbitrary points, shape (n, len(X))."""
        X = as_points(X, self.candidate_points.shape[1])
        if self.n == 0:
            return np.zeros((0, len(X)))
        columns = self.kernel.pairwise(self.points, X)
        return solve_triangular(self.triangular, columns, lower=True)


class PowerL2(NamedTuple):
    """Discrete L2 norm of the power function plus the raw residual floor."""

    norm: float
    min_residual: float


def empty_basis(kernel, candidates):
    """Size-zero basis over ``candidates``; residual is the kernel diagonal."""
    pts = candidates.points if isinstance(candidates, QuadratureSet) else as_points(candidates, kernel.dim)
    diag = kernel.diagonal(pts)
    return NewtonBasis(
        kernel=kernel,
        candidate_points=np.asarray(pts, dtype=float),
        indices=np.zeros(0, dtype=int),
        values=np.zeros((0, len(pts))),
        residual=diag.copy(),
        diag_scale=float(diag.max()),
    )


def _extend(state, new_index, column, score=np.nan):
    """Shared extension step; ``column`` is K(c_j, x_new) over candidates."""
    r_new = state.residual[new_index]
    if r_new <= BREAKDOWN_REL * state.diag_scale:
        raise GreedyBreakdownError(
            f"residual {r_new:.3e} at candidate {new_index} is below the "
            f"breakdown threshold {BREAKDOWN_REL * state.diag_scale:.3e}"
        )
    proj = state.values.T @ state.values[:, new_index] if state.n else 0.0
    v_new = (column - proj) / np.sqrt(r_new)
    residual = state.residual - v_new**2
    return replace(
        state,
        indices=np.append(state.indices, new_index),
        values=np.vstack([state.values, v_new[None, :]]),
        residual=residual,
        selection_scores=np.append(state.selection_scores, score),
        residual_max_history=np.append(state.residual_max_history, residual.max(initial=0.0)),
        residual_sum_history=np.append(state.residual_sum_history, np.clip(residual, 0.0, None).sum()),
    )


def newton_extend(state, new_index):
    """Append the Newton function pivoted at candidate ``new_index``.

    v_{n+1} = (K(., x_new) - sum_i v_i(x_new) v_i) / sqrt(residual at x_new);
    the residual drops by v_{n+1}^2 everywhere.  Raises
    :class:`GreedyBreakdownError` when the pivot residual is below the
    relative threshold.
    """
    column = state.kernel.pairwise(state.candidate_points, state.candidate_points[[new_index]])[:, 0]
    return _extend(state, new_index, column)


def _column_block_stats(kernel, pts, want_max, want_sumsq):
    """Per-column max |K| and sum K^2 of the full candidate matrix, blocked."""
    m = len(pts)
    colmax = np.zeros(m) if want_max else None
    colsq = np.zeros(m) if want_sumsq else None
    step = max(1, 20_000_000 // m)
    for k in range(0, m, step):
        block = kernel.pairwise(pts, pts[k : k + step])
        if want_max:
            colmax[k : k + step] = np.abs(block).max(axis=0)
        if want_sumsq:
            colsq[k : k + step] = (block**2).sum(axis=0)
    return colmax, colsq


def greedy_select(kernel, candidates, n, criterion="linf"):
    """Select ``n`` points from ``candidates`` by power-function greedy rules.

    The first point maximizes the chosen discrete norm of the normalized
    translate K(., x) / sqrt(K(x, x)); every later point maximizes the same
    norm (squared) of the tentative next Newton basis function.  For
    ``criterion="linf"`` the step score reduces to the residual itself.
    Ties break to the lowest candidate index.  On breakdown the basis is
    returned short, with ``breakdown=True``.
    """
    if criterion not in ("linf", "l2"):
        raise ValueError(f"criterion must be 'linf' or 'l2', got {criterion!r}")
    if not isinstance(candidates, QuadratureSet):
        raise TypeError("candidates must be a QuadratureSet")
    m = candidates.size
    if n > m:
        raise ValueError(f"cannot select {n} points from {m} candidates")

    state = empty_basis(kernel, candidates)
    pts = state.candidate_points
    weight = candidates.weight

    cache = None
    if m <= _CACHE_LIMIT:
        cache = kernel.pairwise(pts, pts)
    elif criterion == "l2":
        raise ValueError(
            f"l2 criterion keeps the full candidate kernel matrix in memory; "
            f"candidate count {m} exceeds the supported limit {_CACHE_LIMIT}"
        )

    sqrt_diag = np.sqrt(state.residual)
    if criterion == "linf":
        if getattr(kernel, "column_max_is_diagonal", False):
            colmax = state.residual
        elif cache is not None:
            colmax = np.abs(cache).max(axis=0)
        else:
            colmax, _ = _column_block_stats(kernel, pts, True, False)
        first_scores = colmax / sqrt_diag
    else:
        if cache is not None:
            colsq = (cache**2).sum(axis=0)
        else:
            _, colsq = _column_block_stats(kernel, pts, False, True)
        first_scores = np.sqrt(weight * colsq) / sqrt_diag

    selectable = np.ones(m, dtype=bool)
    first = int(np.argmax(first_scores))
    column = cache[:, first] if cache is not None else kernel.pairwise(pts, pts[[first]])[:, 0]
    try:
        state = _extend(state, first, column, score=float(first_scores[first]))
    except GreedyBreakdownError:
        return replace(state, breakdown=True)
    selectable[first] = False

    # Residual kernel matrix for the L2 step scores, updated in place.
    M = None
    if criterion == "l2":
        M = cache - np.outer(state.values[0], state.values[0])

    threshold = BREAKDOWN_REL * state.diag_scale
    for _ in range(1, n):
        feasible = selectable & (state.residual > threshold)
        if not feasible.any():
            return replace(state, breakdown=True)
        scores = np.full(m, -np.inf)
        if criterion == "linf":
            scores[feasible] = state.residual[feasible]
        else:
            colsq = np.einsum("ij,ij->j", M, M)
            np.divide(weight * colsq, state.residual, out=scores, where=feasible)
        pick = int(np.argmax(scores))
        column = cache[:, pick] if cache is not None else kernel.pairwise(pts, pts[[pick]])[:, 0]
        state = _extend(state, pick, column, score=float(scores[pick]))
        selectable[pick] = False
        if M is not None:
            M -= np.outer(state.values[-1], state.values[-1])
    return state


def power_l2_norm(state, quad):
    """Discrete L2 norm of the power function from the residual vector.

    Negative residual entries (numerical instability) are clamped to zero
    inside the norm but surfaced through ``min_residual``.
    """
    if quad.size != len(state.residual):
        raise ValueError("quadrature set does not match the candidate set of the basis")
    clamped = np.clip(state.residual, 0.0, None)
    return PowerL2(
        norm=float(np.sqrt(quad.weight * clamped.sum())),
        min_residual=float(state.residual.min()),
    )
