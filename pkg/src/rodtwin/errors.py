"""Exception types shared across the package."""


class RodtwinError(Exception):
    """Base class for all rodtwin errors."""


class DomainError(RodtwinError, ValueError):
    """An input lies outside the physical/tabulated domain of an operation."""


class ConfigurationError(RodtwinError, ValueError):
    """Invalid configuration (mesh counts, rosters, inconsistent geometry...)."""


class CorrelationRangeError(DomainError):
    """A closure correlation was evaluated outside its validity range."""


class SolverError(RodtwinError, RuntimeError):
    """A numerical solve failed (non-convergence, singular system, range blowout)."""

    def __init__(self, message, residuals=None, z=None):
        super().__init__(message)
        self.residuals = residuals
        self.z = z


class ShapeError(RodtwinError, ValueError):
    """Array/parameter shape mismatch in the network layers."""


class TrainingError(RodtwinError, RuntimeError):
    """Training diverged or produced non-finite quantities."""


class MetricError(RodtwinError, ValueError):
    """A metric is undefined for the given inputs (constant truth, zero norm)."""
