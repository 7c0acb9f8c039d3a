"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class HighSNRViolation(DomainError):
    """Cell is too large for the high-SNR load approximation.

    Raised when the cell edge lies beyond the radius at which the mean SNR
    drops to 0 dB, i.e. when ``A >= pi * xi**(2/alpha)``.
    """


class ConvergenceError(RuntimeError):
    """Iterative solver failed to converge.

    Attributes
    ----------
    iterations : int
        Number of iterations performed.
    residual : float
        Worst residual at exit.
    """

    def __init__(self, message, iterations=0, residual=float("nan")):
        super().__init__(f"{message} (iterations={iterations}, residual={residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class InstabilityError(ValueError):
    """Load at or above one: the processor-sharing queue has no stationary regime."""


class EmptyRealizationError(RuntimeError):
    """A Poisson sample produced no points."""


class InsufficientSamplesError(ValueError):
    """Too few cells to form the requested statistics."""


class ConfigError(ValueError):
    """Invalid configuration key or value."""
