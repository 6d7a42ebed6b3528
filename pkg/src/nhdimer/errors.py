"""Exception hierarchy shared across the package."""


class NhdimerError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(NhdimerError):
    """Invalid or malformed run configuration."""


class IntegrationError(NhdimerError):
    """Integration aborted; carries the time at which it failed."""

    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class StepUnderflow(IntegrationError):
    """Adaptive step size fell below the allowed floor."""


class NonFiniteState(IntegrationError):
    """NaN or Inf encountered in the state or error estimate."""


class FitFailed(NhdimerError):
    """Least-squares fit did not converge; carries diagnostics."""

    def __init__(self, message, residual_rms=None):
        super().__init__(message)
        self.residual_rms = residual_rms


class RangeError(NhdimerError, ValueError):
    """Requested device setting is outside the hardware range."""
