"""Exception types shared across the toolkit."""


class ChartDomainError(ValueError):
    """Coordinates fall outside the chart's domain box."""


class GeodesicExitError(RuntimeError):
    """Geodesic integration left the chart domain.

    Carries the last parameter value that was still inside the box and,
    when available, the truncated curve up to that parameter.
    """

    def __init__(self, message, last_t, partial=None):
        super().__init__(message)
        self.last_t = last_t
        self.partial = partial


class LogConvergenceError(RuntimeError):
    """Geodesic shooting failed to hit the target point."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class HolonomySamplingError(RuntimeError):
    """Loop sampling exhausted its retry budget."""


class SeminormZeroError(ValueError):
    """A norm-only operation hit a vanishing (semi-norm) value."""


class SamplingError(RuntimeError):
    """Too few usable samples remain to fit the requested quantity."""
