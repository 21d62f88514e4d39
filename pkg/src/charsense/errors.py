"""Exception types raised across the package."""


class CharsenseError(ValueError):
    """Base class for all parameter and verification errors."""


class NotPrime(CharsenseError):
    pass


class CapExceeded(CharsenseError):
    pass


class AlphabetMismatch(CharsenseError):
    pass


class RangeError(CharsenseError):
    pass


class TrivialCharacter(CharsenseError):
    pass


class FamilyMismatch(CharsenseError):
    pass


class ZeroSignal(CharsenseError):
    pass


class ConvergenceFailure(CharsenseError):
    pass


class FormatError(CharsenseError):
    """Malformed matrix export or config file."""
