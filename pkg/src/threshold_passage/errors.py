"""Exception types raised by the solvers."""


class PassageError(Exception):
    """Base class for all errors raised by this package."""


class NoBoundState(PassageError):
    """The well does not support the requested bound state at this time."""


class ContinuationFailure(PassageError):
    """Branch tracking of a Sturmian eigenvalue lost the root."""

    def __init__(self, message, last_good=None):
        super().__init__(message)
        self.last_good = last_good


class StiffnessFailure(PassageError):
    """The ODE integrator could not advance (step-size underflow)."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class FitDegenerate(PassageError):
    """Incoming and outgoing WKB waves are collinear over the fit window."""


class ChannelBudgetExceeded(PassageError):
    """More coupled channels were requested than the basis provides."""


class DomainError(PassageError):
    """Argument outside the domain of a special function."""


class FitWindowTooWide(PassageError):
    """Linear threshold-pole model does not fit within tolerance."""


class GridUnderResolved(PassageError):
    """TDSE result changed too much when the grid was refined."""


class ConfigError(PassageError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
