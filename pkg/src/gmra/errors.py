"""Exception types raised across the package."""


class GmraError(Exception):
    """Base class for all package errors."""


class DomainError(GmraError, ValueError):
    """Argument outside the mathematical domain of a function."""


class ParameterError(GmraError, ValueError):
    """Invalid configuration or parameter value."""


class ScaleOverflowError(GmraError):
    """A Gaussian needs a scale outside the configured window."""

    def __init__(self, required_scale, j_min, j_max):
        self.required_scale = required_scale
        super().__init__(
            f"scale {required_scale} outside window [{j_min}, {j_max}]"
        )


class EvaluationError(GmraError, ArithmeticError):
    """An integrand produced a non-finite value."""

    def __init__(self, abscissa, value):
        self.abscissa = abscissa
        super().__init__(f"non-finite integrand value {value!r} at x={abscissa!r}")


class NonConvergenceError(GmraError):
    """Adaptive integration exhausted its depth or interval budget."""

    def __init__(self, message, interval=None):
        self.interval = interval
        super().__init__(message)


class ConditioningError(GmraError):
    """A Fourier-domain fit produced an unexpectedly complex result."""


class CoverageError(GmraError):
    """A fitting interval misses too much of the density's mass."""


class MomentDivergenceError(GmraError):
    """Moment requested for a density without finite moments."""


class ConsistencyError(GmraError, ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative."""


class TableRangeError(GmraError, IndexError):
    """A basis-product lookup fell outside the precomputed table."""
