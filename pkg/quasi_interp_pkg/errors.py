"""
this module defines the exception hierarchy shared by the library and the CLI.

Every error carries the process exit code the CLI maps it to, and can render itself as a
machine-readable dictionary for the JSON written to standard error.
"""

from __future__ import annotations

from typing import Any, Dict, Optional


class QuasiInterpError(Exception):
    """Base class for all errors raised by quasi_interp_pkg."""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = dict(details or {})

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class ParameterError(QuasiInterpError, ValueError):
    """Parameters outside the admissible regime of an operation."""

    exit_code = 1


class InfeasibleError(QuasiInterpError, ValueError):
    """A linear construction or a truncation budget cannot be satisfied."""

    exit_code = 1

    def __init__(
        self,
        message: str,
        minimal_support_radius: Optional[int] = None,
        details: Optional[Dict[str, Any]] = None,
    ):
        details = dict(details or {})
        if minimal_support_radius is not None:
            details["minimal_support_radius"] = minimal_support_radius
        super().__init__(message, details)
        self.minimal_support_radius = minimal_support_radius


class NumericalFailure(QuasiInterpError, RuntimeError):
    """Series or extrapolation did not converge to the requested tolerance."""

    exit_code = 2


class CheckFailure(QuasiInterpError):
    """An acceptance tolerance failed while running with --check."""

    exit_code = 3
