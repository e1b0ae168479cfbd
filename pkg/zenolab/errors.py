"""
The 'errors' module collects the exception classes raised by zeno-lab.

Every class carries the *exit_code* the command line front end
reports when the exception ends a command.
"""


class ZenoLabError(Exception):
    """
    Base class of all zeno-lab errors.

    :param message: human readable description.
    :param details: optional list of machine readable diagnostics.
    """
    exit_code = 4

    def __init__(self, message, details=None):
        super(ZenoLabError, self).__init__(message)
        self.message = message
        self.details = list(details) if details else []

    def to_dict(self):
        """
        Returns the error as a JSON serializable dictionary.
        """
        return {"error": self.__class__.__name__,
                "message": self.message,
                "exit_code": self.exit_code,
                "details": self.details}


class ConfigError(ZenoLabError):
    """
    Invalid experiment configuration. *details* holds
    dictionaries with the keys 'line', 'field' and 'message'.
    """
    exit_code = 2


class ConvergenceError(ZenoLabError):
    """
    A numerical convergence check failed.
    """
    exit_code = 3


class TruncationError(ConvergenceError):
    """
    The adaptive Fock truncation did not converge below its ceiling.
    """


class EngineError(ZenoLabError):
    """
    Failure inside the simulation engine.
    """
    exit_code = 4


class IntegratorError(EngineError):
    """
    The integrated state contains non-finite entries.
    """


class DimensionError(EngineError):
    """
    Operators and states of incompatible dimension were combined.
    """


class AnalysisError(EngineError):
    """
    A decay rate could not be derived from a survival series.
    """
