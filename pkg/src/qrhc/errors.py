"""Exception types shared across the package."""


class QrhcError(Exception):
    """Base class for all package errors."""


class DomainError(QrhcError, ValueError):
    """An operator or scalar lies outside the domain of a function."""


class ContractError(QrhcError, ValueError):
    """Parameters violate the hypotheses of an operation."""


class CapacityError(QrhcError):
    """Requested dimension exceeds the configured cap."""


class NumericalError(QrhcError, ArithmeticError):
    """An iterative routine failed to converge.

    The achieved residual is kept in ``residual``.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SoundnessError(QrhcError, AssertionError):
    """A search reported a violation inside a theorem's hypothesis region."""
