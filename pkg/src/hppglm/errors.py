"""Exception hierarchy.

Every error raised by the library derives from :class:`HppglmError` so
callers (and the CLI exit-code mapping) can distinguish library failures
from programming errors.
"""


class HppglmError(Exception):
    """Base class for all hppglm errors."""


class ConfigError(HppglmError):
    """Invalid or inconsistent run configuration."""


class DataError(HppglmError):
    """Response values outside the family support, or malformed input data."""


class DomainError(HppglmError):
    """Canonical parameter or mean value outside the family domain."""


class PrecisionError(HppglmError):
    """A log-space evaluation overflowed or lost all precision."""


class SingularMatrixError(HppglmError):
    """Rank-deficient design or non-invertible information matrix."""


class FitError(HppglmError):
    """Iterative fit failed to converge; carries the last iterate."""

    def __init__(self, message, last_beta=None, iterations=None):
        super().__init__(message)
        self.last_beta = last_beta
        self.iterations = iterations


class UnsupportedDesignError(HppglmError):
    """Operation requires a factor-only (categorical) design."""


class ApproximationUnavailableError(HppglmError):
    """Preconditions of a limiting approximation are not met."""


class InfeasibleVarianceError(HppglmError):
    """Requested hyperprior variance is unattainable for the family."""

    def __init__(self, message, indices=None):
        super().__init__(message)
        self.indices = indices if indices is not None else []


class InsufficientDrawsError(HppglmError):
    """Too few posterior draws for the requested summary."""


class StuckChainError(HppglmError):
    """An MCMC chain rejected essentially every proposal during warmup."""
