"""Exception hierarchy shared by all modules."""


class DiracABError(Exception):
    """Base class for library errors."""


class DomainError(DiracABError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class ConfigurationError(DiracABError, ValueError):
    """Inconsistent run or flux configuration."""


class ResolutionError(DiracABError):
    """A grid is too coarse for the requested operation."""


class BandLimitError(DiracABError):
    """Input data carries too much spectral mass outside the resolved band."""


class TruncationError(DiracABError):
    """A truncated series or mode sum has not converged to tolerance."""


class AccuracyWarning(UserWarning):
    """A value was produced but its error estimate exceeds the target."""
