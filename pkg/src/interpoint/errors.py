"""Exception hierarchy.

Every error raised for bad input derives from :class:`InterpointError`, which
is a ``ValueError``; the CLI maps these to exit status 2.
"""


class InterpointError(ValueError):
    """Base class for input and validation errors."""


class ParameterError(InterpointError):
    pass


class DimensionError(InterpointError):
    pass


class InsufficientRowsError(InterpointError):
    pass


class SpecError(InterpointError):
    pass


class DegeneracyError(InterpointError):
    pass


class ProfileError(InterpointError):
    pass


class RegimeError(InterpointError):
    pass


class ModeError(InterpointError):
    pass


class FormatError(InterpointError):
    pass


class DataValidationError(InterpointError):
    pass


class LowCountWarning(UserWarning):
    """A Monte Carlo estimate rests on too few events to be trusted."""
