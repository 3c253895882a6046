"""Exception hierarchy shared by the library and the command line."""


class FracSpecError(Exception):
    """Base class for all library errors."""


class DomainError(FracSpecError, ValueError):
    """An argument lies outside the domain of the requested function."""


class PoleError(DomainError):
    """Gamma function evaluated at a nonpositive integer."""


class ValidationError(FracSpecError, ValueError):
    """Inconsistent or malformed user input (backend specs, files, CLI flags)."""


class NumericalError(FracSpecError, ArithmeticError):
    """An iterative numerical procedure did not converge."""


class ConvergenceError(NumericalError):
    """Eigensolver exceeded its iteration cap.

    Attributes
    ----------
    index : int
        Index of the eigenvalue that failed to converge.
    """

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class ExtrapolationError(NumericalError):
    """Successive Richardson estimates failed to agree."""
