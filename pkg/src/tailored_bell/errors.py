"""Exception hierarchy.

Every domain error derives from :class:`DomainError` so the CLI can map them
all to a single exit status.
"""


class DomainError(ValueError):
    """Base class for violated preconditions or invariants."""


class NotHermitian(DomainError):
    pass


class NonSquare(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class NotUnitary(DomainError):
    pass


class FullyCompatible(DomainError):
    """Preprocessing left fewer than two dimensions: the measurements are compatible."""


class NotBistochastic(DomainError):
    pass


class OddDimension(DomainError):
    pass


class EvenDimension(DomainError):
    pass


class UnsupportedStructure(DomainError):
    pass


class UnitOverlapPresent(DomainError):
    """An overlap equals one, so the tailored functional would be trivial."""


class ShapeMismatch(DomainError):
    pass


class InvalidRealization(DomainError):
    pass


class SpectrumNotTrinary(DomainError):
    pass


class VisibilityOutOfRange(DomainError):
    pass


class ConditionsNotSatisfied(DomainError):
    pass


class ZeroOverlapInColumn(DomainError):
    pass


class NotBlockDiagonal(DomainError):
    pass


class IndexOutOfRange(DomainError):
    pass


class DimensionTooLarge(DomainError):
    pass


class Infeasible(DomainError):
    pass


class InvalidConfig(DomainError):
    pass
