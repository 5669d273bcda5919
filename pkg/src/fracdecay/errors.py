"""Exception types shared across the package."""

from __future__ import annotations


class FracdecayError(Exception):
    """Base class for package errors."""


class AdmissibilityError(FracdecayError):
    """Raised when (N, s, p, eps) violate the standing assumptions."""


class OpenProblemBoundaryError(FracdecayError):
    """Raised for the open-problem boundary p exactly at its threshold."""


class NonexistenceThresholdError(FracdecayError):
    """Raised when p sits strictly below the existence threshold."""


class ToleranceError(FracdecayError):
    """Requested quadrature tolerance not met; carries the achieved estimate."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3e})")
        self.achieved = achieved


class AssemblyAccuracyError(FracdecayError):
    """Assembled nonlocal operator failed its self-test; use a finer grid."""


class ConvergenceError(FracdecayError):
    """Descent did not reach the residual target within the iteration cap."""

    def __init__(self, message: str, residual: float | None = None):
        if residual is not None:
            message = f"{message} (residual achieved {residual:.3e})"
        super().__init__(message)
        self.residual = residual


class TrivialStateError(FracdecayError):
    """Descent collapsed to the zero function."""


class ConfigError(FracdecayError):
    """Malformed experiment configuration."""
