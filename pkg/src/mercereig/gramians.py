"""Discrete L2 inner products and Gramian assembly for translate bases.

Provides the matrix pencil (A, B): A is the kernel matrix on the selected
points, B collects the L2 inner products of the corresponding kernel
translates, either via quadrature over a candidate set or exactly from the
squared expansion of a Brownian bridge kernel.  Also builds the L2 Gramian
of a Newton basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import get_lapack_funcs, solve_triangular

from .errors import SingularConfigurationError
from .kernels import as_points

__all__ = [
    "GramianPair",
    "discrete_inner",
    "assemble_pencil",
    "newton_l2_gramian",
    "cholesky_spd",
    "export_matrix_csv",
]


def cholesky_spd(M, label="matrix"):
    """Lower Cholesky factor of a symmetric matrix, with a useful failure.

    Raises :class:`SingularConfigurationError` carrying the 1-based index of
    the first non-positive leading minor when M is numerically indefinite.
    """
    M = np.ascontiguousarray(M)
    (potrf,) = get_lapack_funcs(("potrf",), (M,))
    L, info = potrf(M, lower=True, clean=True, overwrite_a=False)
    if info != 0:
        raise SingularConfigurationError(
            f"{label} is not numerically positive definite "
            f"(leading minor of order {info} failed)",
            minor_index=int(info),
        )
    return L


def symmetrize(M):
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class GramianPair:
    """Kernel Gramian A and L2 Gramian B of the translate basis.

    ``provenance`` records how B was obtained: ``"discrete"`` (quadrature
    weight folded in) or ``"exact_expansion"``.
    """

    A: np.ndarray
    B: np.ndarray
    provenance: str

    @property
    def n(self):
        return len(self.A)


def discrete_inner(f_values, g_values, quad):
    """Quadrature inner product w * sum_j f(x_j) g(x_j) over quad points."""
    f = np.asarray(f_values, dtype=float)
    g = np.asarray(g_values, dtype=float)
    if f.shape != (quad.size,) or g.shape != (quad.size,):
        raise ValueError(
            f"value arrays must have length {quad.size}, got {f.shape} and {g.shape}"
        )
    return float(quad.weight * np.dot(f, g))


def _translate_l2_discrete(kernel, selected, quad):
    # B = w * C C^T with C[i, j] = K(x_i, q_j); C is built in column blocks
    # so large quadrature sets never materialize an m x m matrix here.
    n = len(selected)
    B = np.zeros((n, n))
    step = max(1, 20_000_000 // max(n, 1))
    for k in range(0, quad.size, step):
        C = kernel.pairwise(selected, quad.points[k : k + step])
        B += C @ C.T
    return quad.weight * B


def assemble_pencil(kernel, selected, quad, mode="discrete"):
    """Assemble the (A, B) pencil of a translate basis on ``selected`` points.

    Parameters
    ----------
    kernel : kernel object
    selected : (n, d) array of distinct points
    quad : QuadratureSet
        Quadrature rule used for B in discrete mode.
    mode : {"discrete", "exact"}
        Exact mode needs an expansion kernel (Brownian bridge); it uses the
        squared-eigenvalue kernel instead of quadrature.

    Both matrices are symmetrized on assembly; a Cholesky probe of A raises
    :class:`SingularConfigurationError` for degenerate configurations.
    """
    selected = as_points(selected, kernel.dim)
    A = symmetrize(kernel.pairwise(selected, selected))
    cholesky_spd(A, label="kernel matrix")
    if mode == "discrete":
        B = _translate_l2_discrete(kernel, selected, quad)
        provenance = "discrete"
    elif mode == "exact":
        if not getattr(kernel, "has_exact_eigensystem", False):
            raise ValueError("exact mode requires an expansion kernel")
        B = kernel.squared().pairwise(selected, selected)
        provenance = "exact_expansion"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return GramianPair(A=A, B=symmetrize(B), provenance=provenance)


def export_matrix_csv(M, path):
    """Write a matrix as row-major CSV (full storage, shortest round-trip
    floats); debugging aid for Gramians."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w") as fh:
        for row in M:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")
    return path


def newton_l2_gramian(newton, quad, mode="discrete", kernel=None):
    """L2 Gramian G[i, k] = (v_i, v_k)_L2 of a Newton basis.

    Discrete mode integrates over ``quad`` (reusing stored values when the
    quadrature set is the construction candidate set, re-evaluating the
    basis otherwise).  Exact mode maps the exact translate Gramian through
    the triangular change of basis, G = L^{-1} B L^{-T}.
    """
    kernel = kernel if kernel is not None else newton.kernel
    if mode == "discrete":
        if quad.size == newton.values.shape[1] and np.array_equal(quad.points, newton.candidate_points):
            V = newton.values
        else:
            V = newton.evaluate_basis(quad.points)
        return symmetrize(quad.weight * (V @ V.T))
    if mode == "exact":
        if not getattr(kernel, "has_exact_eigensystem", False):
            raise ValueError("exact mode requires an expansion kernel")
        squared = kernel.squared()
        if hasattr(squared, "features"):
            # Gram form W W^T with W = L^{-1} F keeps G exactly positive
            # semidefinite and preserves its tiny eigenvalues far better
            # than solving around an assembled B.
            W = solve_triangular(newton.triangular, squared.features(newton.points), lower=True)
            return symmetrize(W @ W.T)
        B = symmetrize(squared.pairwise(newton.points, newton.points))
        L = newton.triangular
        G = solve_triangular(L, solve_triangular(L, B, lower=True).T, lower=True)
        return symmetrize(G)
    raise ValueError(f"unknown mode {mode!r}")
