"""mercereig: Mercer eigensystem approximation on point-based kernel subspaces.

Approximates the eigenvalues and eigenfunctions of the integral operator of
a continuous positive definite kernel by restricting it to spaces spanned
by kernel translates: either directly, by simultaneous diagonalization of
the kernel and L2 Gramian pencil, or through a greedily selected Newton
basis whose L2 Gramian carries the eigenproblem.  Ships the kernel zoo,
quadrature point sets, and the decay experiments as a CLI.
"""

from .eigensolve import (
    EigenApproximation,
    eigenfunction_values,
    eigs_direct,
    eigs_newton,
    eval_eigenfunction,
    simultaneous_diagonalize,
)
from .errors import GreedyBreakdownError, IllConditionedGramianError, SingularConfigurationError
from .experiments import (
    DecayReport,
    EigencoupleReport,
    GreedyTraceReport,
    PowerDecayReport,
    fit_decay_rate,
    load_report,
    run_bb_eigencouples,
    run_bb_power_decay,
    run_greedy_trace,
    run_matern_decay,
    run_matern_sum_gap,
    save_report,
)
from .gramians import GramianPair, assemble_pencil, discrete_inner, newton_l2_gramian
from .kernels import (
    BrownianBridgeKernel,
    MaternKernel,
    bb_eigenvalue,
    bb_total_trace,
    kernel_trace,
    make_kernel,
)
from .newton import NewtonBasis, empty_basis, greedy_select, newton_extend, power_l2_norm
from .pointsets import QuadratureSet, disk_grid, fill_distance, random_interval_points

__version__ = "0.1.0"

__all__ = [
    "BrownianBridgeKernel",
    "DecayReport",
    "EigenApproximation",
    "EigencoupleReport",
    "GramianPair",
    "GreedyBreakdownError",
    "GreedyTraceReport",
    "IllConditionedGramianError",
    "MaternKernel",
    "NewtonBasis",
    "PowerDecayReport",
    "QuadratureSet",
    "SingularConfigurationError",
    "assemble_pencil",
    "bb_eigenvalue",
    "bb_total_trace",
    "discrete_inner",
    "disk_grid",
    "eigenfunction_values",
    "eigs_direct",
    "eigs_newton",
    "empty_basis",
    "eval_eigenfunction",
    "fill_distance",
    "fit_decay_rate",
    "greedy_select",
    "kernel_trace",
    "load_report",
    "make_kernel",
    "newton_extend",
    "newton_l2_gramian",
    "power_l2_norm",
    "random_interval_points",
    "run_bb_eigencouples",
    "run_bb_power_decay",
    "run_greedy_trace",
    "run_matern_decay",
    "run_matern_sum_gap",
    "save_report",
    "simultaneous_diagonalize",
]
