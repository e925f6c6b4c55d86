"""Exceptions raised by abelian_info.

Two families: ValidationError for inputs that cannot be evaluated (the CLI
exits 2) and ComputationError for failures while evaluating (exit 1).
"""


class AbelianInfoError(Exception):
    """Base class for every error raised by the package."""


# ===========================================================
#  Validation errors (bad input)
# ===========================================================

class ValidationError(AbelianInfoError, ValueError):
    pass


class DimensionError(ValidationError):
    pass


class AlgebraMismatchError(ValidationError):
    pass


class NotSelfAdjointError(ValidationError):
    pass


class InvalidStateError(ValidationError):
    pass


class InvalidChannelError(ValidationError):
    pass


class InvalidCodeError(ValidationError):
    pass


class CoverError(ValidationError):
    """The proposed map is not an onto unital homomorphism."""


class BudgetExceededError(ValidationError):
    """A dense enumeration would exceed the configured coordinate budget."""


class RateTooHighError(ValidationError):
    """ceil(2^(kR)) codewords do not fit into m^k input strings."""


class DegenerateStateError(ValidationError):
    pass


class DecodeError(ValidationError):
    pass


# ===========================================================
#  Computation errors
# ===========================================================

class ComputationError(AbelianInfoError):
    pass


class DomainError(ComputationError):
    """A scalar function is undefined at some coefficient."""


class ConsistencyError(ComputationError):
    """An internal cross-check between two evaluation paths failed."""
