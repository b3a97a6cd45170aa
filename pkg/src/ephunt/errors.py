"""Exception hierarchy shared by every ephunt module."""


class EPHuntError(Exception):
    """Base class for all library errors."""


class DimensionMismatch(EPHuntError, ValueError):
    pass


class SingularMatrix(EPHuntError):
    """An LU pivot fell below the relative floor."""


class NoConvergence(EPHuntError):
    pass


class AtExceptionalPoint(EPHuntError):
    """Eigenvectors have coalesced (or nearly so); the biorthogonal basis is unavailable."""


class AmbiguousMatching(EPHuntError):
    pass


class ZeroVector(EPHuntError, ValueError):
    pass


class NotNormalized(EPHuntError, ValueError):
    pass


class NotBiorthonormal(EPHuntError, ValueError):
    pass


class StepTooLarge(EPHuntError):
    """|1 - F| exceeded 0.5, so the second-order expansion is meaningless."""


class InvalidSpec(EPHuntError, ValueError):
    pass


class EvenNRejected(EPHuntError, ValueError):
    pass
