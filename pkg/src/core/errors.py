"""
Exception hierarchy for the risk engines
Every failure raised by src.core derives from RiskModelError
"""
from typing import List, Optional


class RiskModelError(Exception):
    """Base class for all ruinalloc errors"""


class ModelValidationError(RiskModelError, ValueError):
    """A risk model violates one or more structural invariants"""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid model")


class ConfigParseError(RiskModelError, ValueError):
    """A model file could not be parsed"""

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{location}")


class DomainError(RiskModelError, ValueError):
    """An argument lies outside the mathematical domain of the operation"""


class NumericalError(RiskModelError, ArithmeticError):
    """A well-posed query has no usable numerical answer"""


class NoCramerRoot(NumericalError):
    """The aggregate Lévy exponent has no positive root (drift is not negative)"""


class InfeasibleCondition(NumericalError):
    """The conditioning event has probability zero in floating point"""


class UndefinedAllocation(NumericalError):
    """The requested allocation does not exist for this model and horizon"""


class ZeroRuinedPaths(NumericalError):
    """No simulated path reached the barrier"""


class ZeroConditioningPaths(NumericalError):
    """No simulated supremum fell inside the conditioning window"""


class NotSupported(RiskModelError):
    """The model/horizon/method combination is not implemented"""


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    Returns:
        1 for input problems, 2 for numerical failures and unsupported requests
    """
    if isinstance(error, (ModelValidationError, ConfigParseError, DomainError)):
        return 1
    return 2
