"""Exception types raised across the package."""


class BanditError(Exception):
    """Base class for every error raised by csarbandit."""


class InvalidParams(BanditError, ValueError):
    pass


class InvalidSubset(BanditError, ValueError):
    pass


class InvalidArm(BanditError, IndexError):
    pass


class NotConstructible(BanditError, ValueError):
    pass


class NoOrderFound(BanditError):
    pass


class InvalidGrouping(BanditError, ValueError):
    pass


class PaddingExhausted(BanditError):
    """Not enough distinct spare arms to complete the last block."""


class AllAccepted(BanditError):
    """EST2 was asked to estimate with k arms already pinned."""


class DegenerateDesign(BanditError):
    pass


class Singular(BanditError, ArithmeticError):
    pass


class NotSymmetric(BanditError, ValueError):
    pass


class NotPositiveDefinite(BanditError, ValueError):
    pass


class Unbounded(BanditError, ValueError):
    pass


class TooLarge(BanditError, ValueError):
    pass


class NoData(BanditError):
    pass


class NonTermination(BanditError):
    """Raised when exact-PAC CSAR runs out of phases (zero-gap instance)."""
