"""Exception hierarchy shared by all wavelab modules."""


class WavelabError(Exception):
    """Base class for every error raised by wavelab."""


class InvalidParam(WavelabError, ValueError):
    pass


class DomainError(WavelabError, ValueError):
    pass


class DeltaOutOfRange(DomainError):
    """delta = (mu1 - 1)^2 - 4 mu2^2 is outside (0, 1]."""


class NonConvergent(WavelabError, ArithmeticError):
    pass


class QuadFailure(WavelabError, ArithmeticError):
    pass


class ConeViolation(DomainError):
    """A kernel was evaluated outside the closed characteristic cone."""


class StabilityFailure(WavelabError, ArithmeticError):
    pass


class GridTooSmall(WavelabError):
    pass


class WindowTooShort(WavelabError, ValueError):
    pass
