"""Exception hierarchy for nonhermitian_sync.

Every failure raised by the library derives from :class:`SyncError`, so the
command line layer can map whole families of failures onto exit codes:

- :class:`ConfigError`, :class:`ParameterError` and :class:`ConditionError`
  are user input problems (exit code 1).
- :class:`OutputError` covers artifact writing (exit code 3).
- everything else is a numerical failure (exit code 2).
"""

from __future__ import annotations

from typing import Optional, Sequence


class SyncError(Exception):
    """Base class for all nonhermitian_sync errors."""


class ParameterError(SyncError, ValueError):
    """A parameter set violates its invariants."""


class ConditionError(SyncError):
    """A synchronization condition is vacuous or asked for in the wrong regime."""


class ExceptionalPointError(SyncError):
    """Branch-dependent formulas requested at an exceptional point."""


class NoDominantModeError(SyncError):
    """No unique slowest-decaying eigenmode exists."""


class DarkDominatedError(NoDominantModeError):
    """The dark modes outlive the bright sector, so no ratio is claimed."""


class UndampedSystemError(SyncError):
    """A steady state was requested for a spectrum that is not strictly damped."""


class TransformError(SyncError):
    """The collective basis change failed its invertibility check."""


class NumericalFailureError(SyncError):
    """NaN, overflow or step failure during integration."""

    def __init__(self, message: str, step: Optional[int] = None):
        if step is not None:
            message = f"{message} (step {step})"
        super().__init__(message)
        self.step = step


class SingularAmplitudeError(NumericalFailureError):
    """Polar equations hit the amplitude floor with the Cartesian fallback disabled."""


class ConfigError(SyncError):
    """Configuration text failed validation; carries every problem found."""

    def __init__(self, errors: Sequence[str]):
        self.errors = list(errors)
        summary = "; ".join(self.errors) if self.errors else "invalid configuration"
        super().__init__(summary)


class OutputError(SyncError):
    """Writing an artifact failed."""
