"""Exception hierarchy.

Argument errors (bad parameters, violated preconditions) and data errors
(missing or malformed zero data) are kept apart because the command line
maps them to different exit codes.
"""


class PairCorrError(Exception):
    pass


class ArgumentError(PairCorrError, ValueError):
    """A parameter lies outside the documented domain of an operation."""


class DomainError(ArgumentError):
    pass


class BackendUnsupportedError(ArgumentError):
    pass


class DataError(PairCorrError):
    """Input data is missing, incomplete or malformed."""


class IncompleteDataError(DataError):
    """A zero sum was requested above the guaranteed-complete height."""


class MissedZeroError(DataError):
    def __init__(self, message, block=None):
        super().__init__(message)
        self.block = block


class ZeroFileError(DataError):
    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno
