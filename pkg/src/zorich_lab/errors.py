"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class ZorichError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ZorichError, ValueError):
    """An input lies outside the domain of an operation."""


class OverflowGuardError(ZorichError, OverflowError):
    """A height exceeded the overflow guard before exponentiation.

    Attributes
    ----------
    height : float
        The offending height ``x3``.
    """

    def __init__(self, height: float, guard: float):
        super().__init__(f"height {height:.6g} exceeds overflow guard {guard:.6g}")
        self.height = float(height)
        self.guard = float(guard)


class SeamError(ZorichError, ValueError):
    """A finite-difference stencil would straddle a non-smooth seam."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class RegimeError(ZorichError, ValueError):
    """Parameters fall outside the regime in which a quantity exists."""


class InadmissibleError(ZorichError, ValueError):
    """A symbol sequence cannot be pulled back from the given point.

    Attributes
    ----------
    step : int
        Index of the symbol at which the half-space condition failed.
    """

    def __init__(self, message: str, step: int):
        super().__init__(message)
        self.step = step


class ConvergenceError(ZorichError, RuntimeError):
    """An iteration did not reach its tolerance; carries the last residual."""

    def __init__(self, message: str, residual: float, point=None):
        super().__init__(message)
        self.residual = float(residual)
        self.point = point


class ConfigError(ZorichError, ValueError):
    """Invalid configuration document or slice specification."""
