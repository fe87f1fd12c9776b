"""Exception types raised by the library."""


class KerrKittenError(Exception):
    """Base class for all library errors."""


class DivergentSeries(KerrKittenError, ValueError):
    """An identity was requested outside the domain where its series converges."""


class DegenerateState(KerrKittenError, ArithmeticError):
    """The requested superposition is numerically the null vector."""


class UnderResolvedGrid(KerrKittenError, RuntimeError):
    """A phase-space grid does not cover the support of the field, or a
    quadrature refinement estimate exceeds the requested tolerance."""


class SigmaOutOfRange(KerrKittenError, ValueError):
    """Smoothing parameter outside ``(0, 1]``."""


class UnsupportedSelection(KerrKittenError, ValueError):
    """No automatic kitten selection exists for the given parameters."""


class WrongKappa(KerrKittenError, ValueError):
    """A closed form valid only for a specific photon number was misused."""


class ConfigError(KerrKittenError, ValueError):
    """Invalid run configuration."""
