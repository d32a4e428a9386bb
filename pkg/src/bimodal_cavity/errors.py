"""Exception hierarchy shared by every layer of the package."""


class CavityError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(CavityError, ValueError):
    pass


class NotHermitian(CavityError, ValueError):
    pass


class Singular(CavityError):
    """Linear system (or Liouvillian with trace row) is numerically singular."""


class NoConvergence(CavityError):
    pass


class NotConverged(CavityError):
    """Steady-state residual bound failed after the solve."""


class InvalidParameter(CavityError, ValueError):
    pass


class UnequalKappas(InvalidParameter):
    pass


class UnknownLabel(CavityError, KeyError):
    pass


class UnknownFigure(CavityError, KeyError):
    pass


class StabilityGuard(CavityError, ValueError):
    pass


class InvariantViolation(CavityError):
    pass


class SpectrumAssertion(CavityError, AssertionError):
    """A manifold property that holds as a theorem failed numerically."""


class SweepFailed(CavityError):
    pass


class ConfigError(CavityError, ValueError):
    pass


class TooLarge(CavityError, MemoryError):
    """Requested matrix exceeds the size guard."""
