"""Exception types shared across the package."""


class LamplighterError(Exception):
    """Base class for all errors raised by lamplighter_lab."""


class InvalidSpec(LamplighterError, ValueError):
    pass


class ConstructionFailed(LamplighterError):
    pass


class BudgetExceeded(LamplighterError):
    pass


class NotReversible(LamplighterError):
    pass


class HorizonTooShort(LamplighterError):
    pass


class SingularSystem(LamplighterError):
    pass


class ZeroVariance(LamplighterError, ValueError):
    pass


class UnreliableEstimate(LamplighterError):
    pass


class WindowTooNarrow(LamplighterError):
    pass


class MissingBaseProfile(LamplighterError):
    pass


class WrongFamily(LamplighterError, ValueError):
    pass


class RecurrentDimension(LamplighterError, ValueError):
    pass


class SchemaError(LamplighterError, ValueError):
    """A report failed validation on read-back."""
