"""Exception hierarchy."""


class QHVError(Exception):
    """Base class for all errors raised by :mod:`qhv`."""


class ValidationError(QHVError, ValueError):
    """Input violates a documented precondition (shape, hermiticity, trace...)."""


class NumericalError(QHVError, ArithmeticError):
    """A numerical routine failed (for example eigensolver non-convergence)."""


class ResourceError(QHVError):
    """A configured resource limit (atom cap, factor cap) would be exceeded."""


class ContractViolation(QHVError):
    """An operation was called outside its mathematical contract.

    Raised for instance when a routine that requires commuting observables
    receives a non-commuting pair.
    """
