"""Exception hierarchy shared by services and command routers.

Every error carries the process exit code the CLI reports for it: 2 for bad
input (files, layouts, schedules), 1 for numeric or acceptance failures.
"""

from typing import Optional


class IonSpinError(Exception):
    exit_code = 1

    def __init__(self, message: str, detail: Optional[str] = None):
        super().__init__(message)
        self.detail = detail


class InputError(IonSpinError):
    exit_code = 2


class ConfigError(InputError):
    pass


class FormatError(InputError):
    pass


class LayoutError(InputError):
    pass


class ScheduleError(InputError):
    pass


class RangeError(IonSpinError):
    """Evaluation point outside the range covered by a tabulated basis."""


class NumericError(IonSpinError):
    pass


class NotAWellError(IonSpinError):
    """Fitted curvature is non-positive or a degenerate plateau."""


class ConvergenceError(IonSpinError):
    def __init__(self, message: str, last_residual: float):
        super().__init__(message, detail=f"last residual {last_residual:.3e}")
        self.last_residual = last_residual


class ConfinementError(IonSpinError):
    pass


class SingularityError(IonSpinError):
    pass


class UnstableCrystalError(IonSpinError):
    pass


class CapacityError(IonSpinError):
    pass


class DimensionMismatchError(IonSpinError):
    pass


class QubitIndexError(IonSpinError):
    pass


def describe_validation_error(exc) -> str:
    """Field path and message of every pydantic validation failure."""
    return "; ".join(
        f"{'.'.join(str(part) for part in error['loc']) or '<root>'}: {error['msg']}" for error in exc.errors()
    )
