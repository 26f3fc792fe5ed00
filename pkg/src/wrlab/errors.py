"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class,
so the CLI can map them onto exit codes without string matching.
"""


class WrlabError(Exception):
    """Base class for all package errors."""


class DimensionError(WrlabError):
    """Array lengths or shapes do not match the grid."""


class DomainError(WrlabError):
    """An argument lies outside the mathematical domain of the operation."""


class CoefficientError(WrlabError):
    """Coefficient data violates ellipticity or sampling requirements."""


class ConfigurationError(WrlabError):
    """A configuration document or kernel descriptor is malformed."""


class ResolventError(WrlabError):
    """A resolvent-type linear system could not be solved reliably."""

    def __init__(self, message, lam=None):
        super().__init__(message)
        self.lam = lam


class NumericalError(WrlabError):
    """A numerical routine failed to reach its accuracy target."""


class ContourError(WrlabError):
    """A contour integral is ill-posed, e.g. an eigenvalue sits on the path."""

    def __init__(self, message, eigenvalue=None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class RootSearchError(WrlabError):
    """A root search diverged or found an unexpected number of roots."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics


class ScalingError(WrlabError):
    """A matrix exponential overflowed; rescale by exp(-s t) and retry."""


class PreconditionError(WrlabError):
    """A stated precondition of the operation does not hold for the input."""


class ConsistencyError(WrlabError):
    """Inputs that must satisfy a joint identity fail to do so."""
