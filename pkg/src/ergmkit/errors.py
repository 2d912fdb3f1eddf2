"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: FormulaError and friends map to 2,
estimation diagnostics map to 3, UnsupportedFeatureError maps to 4.
"""

from __future__ import annotations


class ErgmkitError(Exception):
    """Base class for all package errors."""


class NetworkError(ErgmkitError):
    """Invalid network data or an operation not defined for this network."""


class FormulaError(ErgmkitError):
    """Syntax or semantic error in a model/constraint formula."""

    def __init__(self, message: str, pos: int | None = None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class ModelError(ErgmkitError):
    """A term or operator was applied outside its contract."""


class EstimationError(ErgmkitError):
    """Estimation failed or produced a diagnostic that blocks the result."""


class DegeneracyError(EstimationError):
    """Observed statistics unattainable or chain diverged."""


class EnumerationLimitError(EstimationError):
    """State space too large for exhaustive enumeration without force."""


class UnsupportedFeatureError(ErgmkitError):
    """Recognized but intentionally unsupported feature (e.g. dyadnoise)."""
