"""Exception hierarchy shared by all curvham modules."""

from __future__ import annotations


class CurvhamError(Exception):
    """Base class for every error raised by curvham."""


class ConfigurationError(CurvhamError, ValueError):
    """Invalid or inconsistent configuration value.

    ``field`` names the offending configuration entry when known, so the
    CLI can point at it.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class UnsupportedConfigurationError(ConfigurationError):
    """A combination the library deliberately does not model."""


class SingularPointError(CurvhamError, ValueError):
    """Evaluation requested at a coordinate singularity (e.g. a sphere pole)."""


class InvalidGaugeFunctionError(CurvhamError, ValueError):
    """Gauge function is not single valued on the surface."""


class MissingFieldError(CurvhamError, ValueError):
    """A required field (usually the Cartesian magnetic field) was not supplied."""


class DimensionError(CurvhamError, ValueError):
    """Array shapes or operator dimensions do not match."""


class ConvergenceError(CurvhamError, RuntimeError):
    """Iterative eigensolver failed to converge.

    Carries the best eigenvalue estimates and residual norms reached.
    """

    def __init__(self, message: str, eigenvalues=None, residuals=None):
        super().__init__(message)
        self.eigenvalues = eigenvalues
        self.residuals = residuals
