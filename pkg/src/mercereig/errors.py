"""Exceptions shared by the Gramian assembly and eigensolver layers."""

__all__ = ["IllConditionedGramianError", "SingularConfigurationError", "GreedyBreakdownError"]


class IllConditionedGramianError(ValueError):
    """A Gramian that should be positive definite failed its Cholesky step.

    ``minor_index`` is the 1-based order of the offending leading minor, as
    reported by the factorization.
    """

    def __init__(self, message, minor_index=None):
        super().__init__(message)
        self.minor_index = minor_index


class SingularConfigurationError(IllConditionedGramianError):
    """Point configuration whose kernel matrix is numerically singular."""


class GreedyBreakdownError(ValueError):
    """Requested pivot has residual below the breakdown threshold."""
