"""Discrete eigenpairs of the kernel integral operator restricted to a
translate subspace.

Two routes: simultaneous diagonalization of the (kernel, L2) Gramian pencil
with the whitening done by the kernel Gramian, so the eigenvalues read off
the diagonal directly; and the symmetric eigenproblem of the L2 Gramian of
a Newton basis, whose eigenvectors are the coefficients of the eigenbasis
in the Newton basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh, solve_triangular

from .gramians import cholesky_spd, symmetrize
from .kernels import as_points

__all__ = [
    "EigenApproximation",
    "simultaneous_diagonalize",
    "eigs_direct",
    "eigs_newton",
    "eval_eigenfunction",
    "eigenfunction_values",
]

# Eigenvalues below UNSTABLE_REL times the largest one are kept but flagged.
UNSTABLE_REL = 1e-15


@dataclass(frozen=True)
class EigenApproximation:
    """Descending eigenvalues with the coefficient matrix of the eigenbasis.

    Column j of ``coefficients`` expresses sqrt(lambda_j) * phi_j in the
    basis named by ``basis_tag`` ("newton" or "translates").  ``unstable``
    flags eigenvalues at or below the relative solver floor (including any
    nonpositive ones); they are reported as computed, never clamped.
    """

    eigenvalues: np.ndarray  # (n,), descending
    coefficients: np.ndarray  # (n, n)
    basis_tag: str
    points: np.ndarray | None = None  # (n, d) selected points, for evaluation
    unstable: np.ndarray | None = None  # (n,) bool

    @property
    def n(self):
        return len(self.eigenvalues)

    @property
    def any_unstable(self):
        return bool(self.unstable.any()) if self.unstable is not None else False


def _fix_signs(columns):
    """Make the largest-magnitude entry of each column positive."""
    lead = np.abs(columns).argmax(axis=0)
    signs = np.sign(columns[lead, np.arange(columns.shape[1])])
    signs[signs == 0] = 1.0
    return columns * signs


def _instability_mask(eigenvalues):
    top = eigenvalues.max(initial=0.0)
    return (eigenvalues <= 0.0) | (eigenvalues <= UNSTABLE_REL * top)


def simultaneous_diagonalize(A, B):
    """Congruence transform diagonalizing the SPD pencil (A, B).

    Returns ``(C_V, Sigma)`` with ``C_V^T A C_V = diag(Sigma)`` descending
    and ``C_V^T B C_V = I``: Cholesky-whiten by B, then take the symmetric
    eigendecomposition of the whitened A.  A failed Cholesky of B raises
    :class:`IllConditionedGramianError` carrying the offending leading
    minor index.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    L = cholesky_spd(B, label="whitening Gramian")
    Y = solve_triangular(L, A, lower=True)
    C = symmetrize(solve_triangular(L, Y.T, lower=True).T)
    gamma, U = eigh(C)
    gamma, U = gamma[::-1], U[:, ::-1]
    C_V = solve_triangular(L, U, lower=True, trans="T")
    return _fix_signs(C_V), gamma


def eigs_direct(pair, points=None):
    """Eigenvalues of the restricted operator from the full translate pencil.

    Swaps the pencil roles (whitening by the kernel Gramian A) so the output
    basis is orthonormal in the native space and the diagonal holds the
    operator eigenvalues directly.  Ill conditioning of A propagates as
    :class:`IllConditionedGramianError`; this is the expected failure mode
    for large, smooth-kernel point sets.
    """
    C_V, lam = simultaneous_diagonalize(pair.B, pair.A)
    return EigenApproximation(
        eigenvalues=lam,
        coefficients=C_V,
        basis_tag="translates",
        points=None if points is None else np.atleast_2d(np.asarray(points, dtype=float)),
        unstable=_instability_mask(lam),
    )


def eigs_newton(newton, G):
    """Eigenpairs from the L2 Gramian of a Newton basis.

    The unit eigenvectors of G are the coefficients of sqrt(lambda_j) phi_j
    in the Newton basis; the eigenvalues are the restricted-operator
    eigenvalues, descending.
    """
    G = np.asarray(G, dtype=float)
    if G.shape != (newton.n, newton.n):
        raise ValueError(f"Gramian shape {G.shape} does not match basis size {newton.n}")
    lam, Q = eigh(symmetrize(G))
    lam, Q = lam[::-1], _fix_signs(Q[:, ::-1])
    return EigenApproximation(
        eigenvalues=lam,
        coefficients=Q,
        basis_tag="newton",
        points=newton.points,
        unstable=_instability_mask(lam),
    )


def eigenfunction_values(approx, newton, X, kernel=None):
    """Values of sqrt(lambda_j) phi_j for all j at points X, shape (n, len(X))."""
    if approx.basis_tag == "newton":
        return approx.coefficients.T @ newton.evaluate_basis(X)
    kernel = kernel if kernel is not None else getattr(newton, "kernel", None)
    if kernel is None or approx.points is None:
        raise ValueError("translate-basis evaluation needs the kernel and the assembly points")
    X = as_points(X, approx.points.shape[1])
    return approx.coefficients.T @ kernel.pairwise(approx.points, X)


def eval_eigenfunction(approx, newton, j, x, kernel=None):
    """Evaluate sqrt(lambda_j) phi_j at x (1-based index j, largest first)."""
    if not 1 <= j <= approx.n:
        raise ValueError(f"eigenfunction index must be in [1, {approx.n}], got {j}")
    x = np.asarray(x, dtype=float)
    dim = approx.points.shape[1] if approx.points is not None else newton.candidate_points.shape[1]
    single = x.ndim == 0 or (x.ndim == 1 and dim > 1 and x.size == dim)
    vals = eigenfunction_values(approx, newton, x, kernel=kernel)[j - 1]
    return float(vals[0]) if single else vals
