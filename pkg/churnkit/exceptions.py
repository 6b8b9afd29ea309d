"""
Exceptions raised by the ChurnKit library
"""


class ChurnKitError(Exception):
    """
    Base class for all ChurnKit exceptions
    """


class InvalidInputError(ChurnKitError, ValueError):
    """
    The input to an operation is invalid: non-finite values, wrong shapes, mismatched dimensions etc.
    """


class SingularLinkError(ChurnKitError, ArithmeticError):
    """
    The link function was evaluated at a point where its denominator vanishes.
    """


class TrainingFailure(ChurnKitError):
    """
    Training diverged.
    """

    def __init__(self, message: str, epoch: int):
        super().__init__(message)
        self.epoch = epoch
        """The epoch in which the loss became non-finite"""

    def __str__(self):
        return 'Training failed in epoch {}: {}'.format(self.epoch, self.args[0])


class BoundViolation(ChurnKitError):
    """
    One or more bound checkers reported a violation.
    """
