"""
RedunFlow exception hierarchy.

Every error carries the CLI exit code it maps to so that commands can
translate failures without a lookup table:
  1 - verification failure
  2 - configuration / input error
  3 - adapter / runtime error
"""

from typing import Any, Dict, Optional


class RedunFlowError(Exception):
    """Base class for all RedunFlow errors"""

    exit_code: int = 2

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        name = type(self).__name__
        if self.details:
            extras = ", ".join(f"{k}={v}" for k, v in self.details.items())
            return f"{name}: {self.message} ({extras})"
        return f"{name}: {self.message}"


class InvalidConfig(RedunFlowError):
    """A parameter or option violates its documented range"""


class DimensionMismatch(RedunFlowError):
    """Feature vectors, baselines or matrices disagree on d"""


class UnlabeledDataset(RedunFlowError):
    """Training was requested on a dataset without labels"""


class DatasetFormatError(RedunFlowError):
    """A dataset file does not follow the CSV contract"""


class GameTooLarge(RedunFlowError):
    """Exhaustive enumeration was requested above the size guard"""


class InvalidMatrix(RedunFlowError):
    """An interaction matrix is malformed or contains non-finite entries"""


class TrainingDiverged(RedunFlowError):
    """The training loss became non-finite"""

    exit_code = 3


class AdapterProtocolError(RedunFlowError):
    """The external model adapter died or replied with a malformed message"""

    exit_code = 3


class RegressionSingular(RedunFlowError):
    """The kernel regression system is rank deficient"""

    exit_code = 3


class VerificationFailure(RedunFlowError):
    """A property of the synthetic verification suite was violated"""

    exit_code = 1
