"""Exception types shared across the package.

The CLI maps these onto process exit codes: config problems -> 1,
capacity/numeric problems -> 2, validation failures -> 3.
"""

from __future__ import annotations


class CqdephError(Exception):
    """Base class for all package-specific errors."""


class InvalidArgumentError(CqdephError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(CqdephError):
    """A requested object exceeds the supported problem size."""


class IntegrabilityError(InvalidArgumentError):
    """A spectral density fails its integrability requirements."""


class NumericsError(CqdephError):
    """A numeric guard tripped (truncation risk, non-convergence)."""


class ConfigError(CqdephError):
    """A run configuration file is malformed or incomplete."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationFailure(CqdephError):
    """One or more self-consistency checks exceeded tolerance."""
