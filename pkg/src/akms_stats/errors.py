"""Exception hierarchy shared by every module in the package."""


class AkmsError(Exception):
    """Base class for all package errors."""


class ParameterError(AkmsError, ValueError):
    """An input violates a documented parameter invariant."""


class DomainError(AkmsError, ValueError):
    """An argument lies outside the region where the quantity is defined."""


class MomentUndefinedError(DomainError):
    """The requested moment does not exist (heavy tail)."""


class DegenerateCaseError(AkmsError, ArithmeticError):
    """A series or contour representation is not usable for these inputs.

    Callers are expected to fall back to the integral representation.
    """


class AccuracyError(AkmsError, ArithmeticError):
    """The requested accuracy could not be reached.

    Attributes
    ----------
    partial : float or None
        Best value obtained before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
