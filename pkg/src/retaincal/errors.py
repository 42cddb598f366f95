"""Exception hierarchy shared by every module."""

from __future__ import annotations


class RetaincalError(Exception):
    """Base class for all library errors."""


class DomainError(RetaincalError, ValueError):
    """An argument is outside the domain a formula is stated for."""


class CalibrationError(RetaincalError, ValueError):
    """A noise calibration request is unsound (e.g. oracle-kind report)."""


class UnboundedSensitivityError(RetaincalError, ValueError):
    """A bound is vacuous for this instance (e.g. zero eigengap, lambda=0)."""


class DataError(RetaincalError, ValueError):
    """Input data violates a documented invariant (norms, labels, format)."""


class DisconnectedGraphError(DataError):
    """The spanning-tree weight is undefined on a disconnected graph."""


class NonSeparableError(RetaincalError, ValueError):
    """Hard-margin training is infeasible for the given sample."""


class ConvergenceError(RetaincalError, RuntimeError):
    """An iterative solver exhausted its budget before reaching tolerance."""


class ConditionError(RetaincalError, ValueError):
    """A bound's hypothesis fails; carries the measured deficit."""

    def __init__(self, message: str, deficit: float | None = None):
        super().__init__(message)
        self.deficit = deficit
