"""Exception hierarchy shared by all hypwalk modules."""


class HypwalkError(Exception):
    """Base class for every error raised by hypwalk."""


class InvalidIsometryError(HypwalkError, ValueError):
    pass


class DomainError(HypwalkError, ValueError):
    """A point lies on or outside the unit circle."""


class NotHyperbolicError(HypwalkError, ValueError):
    """The (n, m) pair, or an isometry, is not hyperbolic."""


class WrongIsometryClassError(HypwalkError, ValueError):
    pass


class ConstructionError(HypwalkError, ValueError):
    """Group construction preconditions (parity, base point) failed."""


class UnknownLabelError(HypwalkError, KeyError):
    pass


class BudgetError(HypwalkError, RuntimeError):
    pass


class PrecisionError(HypwalkError, ArithmeticError):
    pass


class MeasureError(HypwalkError, ValueError):
    pass


class SymmetryError(MeasureError):
    pass


class ConfigurationError(HypwalkError, ValueError):
    pass


class DegenerateDistributionWarning(UserWarning):
    pass
