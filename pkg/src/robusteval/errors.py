"""Exception hierarchy shared by all robusteval modules."""

from __future__ import annotations


class RobustEvalError(Exception):
    """Base class for errors raised by robusteval."""


class InvalidOrderError(RobustEvalError, ValueError):
    pass


class InvalidReferenceError(RobustEvalError, ValueError):
    pass


class InvalidScriptError(RobustEvalError, ValueError):
    pass


class DegenerateInputError(RobustEvalError, ValueError):
    pass


class OutOfDomainError(RobustEvalError, ValueError):
    pass


class InvalidTagsError(RobustEvalError, ValueError):
    pass


class MissingFeatureError(RobustEvalError, ValueError):
    pass


class NumericFailureError(RobustEvalError, ArithmeticError):
    pass


class TrainingDivergedError(RobustEvalError, ArithmeticError):
    """Raised when the training loss becomes non-finite.

    ``checkpoint`` holds a copy of the last parameters that produced a finite
    loss, so a caller can resume or inspect them.
    """

    def __init__(self, message: str, checkpoint=None, step: int | None = None):
        super().__init__(message)
        self.checkpoint = checkpoint
        self.step = step


class SchemaError(RobustEvalError, ValueError):
    pass


class IncompleteScoresError(RobustEvalError, ValueError):
    pass


class IncompleteCategoriesError(RobustEvalError, KeyError):
    pass
