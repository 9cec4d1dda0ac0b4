"""Exception hierarchy shared by all modules."""


class EntroBoundsError(Exception):
    """Base class for every error raised by this package."""


class NonHermitianInput(EntroBoundsError, ValueError):
    pass


class NotPSD(EntroBoundsError, ValueError):
    pass


class NotInvertible(EntroBoundsError, ValueError):
    pass


class DomainError(EntroBoundsError, ValueError):
    """A spectral function is undefined at some eigenvalue."""


class DimensionMismatch(EntroBoundsError, ValueError):
    pass


class LabelMismatch(EntroBoundsError, ValueError):
    pass


class NormalizationError(EntroBoundsError, ValueError):
    pass


class UnknownOutcome(EntroBoundsError, KeyError):
    pass


class ZeroReferenceProbability(EntroBoundsError, ValueError):
    pass


class SingularAverageState(EntroBoundsError, ValueError):
    """The ensemble average is not invertible, so Hall's construction is unavailable."""


class DimensionTooLarge(EntroBoundsError, ValueError):
    pass


class ParseError(EntroBoundsError, ValueError):
    """Scenario file could not be parsed; the message names the offending path."""


class InvariantViolation(EntroBoundsError, AssertionError):
    """A bound ordering or identity failed beyond its tolerance."""
