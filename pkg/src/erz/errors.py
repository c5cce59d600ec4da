"""Exception types raised across the package."""


class ErzError(Exception):
    """Base class for all package errors."""


class DivisionByZero(ErzError, ZeroDivisionError):
    pass


class ParseError(ErzError, ValueError):
    pass


class MixedField(ErzError, ValueError):
    pass


class ArityMismatch(ErzError, ValueError):
    pass


class BudgetExceeded(ErzError, RuntimeError):
    pass


class NetworkError(ErzError, ValueError):
    """Structural problem with a network description."""


class BadFanInDepth(NetworkError):
    pass


class EmptyOutputs(NetworkError):
    pass


class DanglingEdge(NetworkError):
    pass


class RationalActivationNotExpandable(ErzError, ValueError):
    pass


class CharacteristicTwo(ErzError, ValueError):
    pass


class NotRationalActivation(ErzError, ValueError):
    pass


class RejectionBudgetExceeded(ErzError, RuntimeError):
    pass


class NonsenseInput(ErzError, ValueError):
    pass


class DegenerateSystem(ErzError, ValueError):
    pass
