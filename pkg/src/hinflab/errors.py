"""Exception types shared across the package."""

from __future__ import annotations


class LabError(Exception):
    """Base class for all package-specific errors."""


class SpectrumHit(LabError):
    """Resolvent requested too close to an eigenvalue."""


class NotSectorial(LabError):
    """Operator has spectrum touching the negative real axis (or 0)."""


class BudgetTooSmall(LabError):
    """Monte-Carlo estimate requested with fewer than 100 samples."""


class ViolationFound(LabError):
    """A checked inequality failed; carries the witness instance."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class GridMismatch(LabError):
    """Kernel operator applied to a function on an incompatible grid."""


class AngleConflict(LabError):
    """Contour or domain angle incompatible with the operator's profile."""


class TailNotConverged(LabError):
    """Contour quadrature tail exceeds the declared tolerance."""


class NotCommuting(LabError):
    """Operator family fails the sampled commutation test."""


class SignConventionCalibrationFailed(LabError):
    """Scalar calibration of a fractional-power path returned the wrong sign."""


class ConfigInvalid(LabError):
    """Run configuration failed schema validation."""

    def __init__(self, message: str, errors=None):
        super().__init__(message)
        self.errors = list(errors or [])


class ReportMissing(LabError):
    """Plot data requested for a report that does not exist."""
