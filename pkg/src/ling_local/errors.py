"""Exception hierarchy shared by every module."""


class LingError(Exception):
    """Base class for all library errors."""


class SingularMatrix(LingError):
    pass


class NoConvergence(LingError):
    pass


class TooLarge(LingError):
    pass


class CycleEnumLimit(LingError):
    pass


class RejectionLimit(LingError):
    pass


class DegenerateInput(LingError):
    pass


class CombinatorialLimit(LingError):
    pass


class IdentifiabilityError(LingError):
    """Raised when the demixing matrix cannot be mapped back to a model."""


class EmptySupport(IdentifiabilityError):
    pass


class NoAdmissible(IdentifiabilityError):
    pass


class AllFiltered(IdentifiabilityError):
    pass


class AssertionViolated(LingError):
    """An algorithmic assertion failed on the data (not a programming bug)."""
