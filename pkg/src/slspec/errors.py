"""Exception types shared across the toolkit."""


class SlspecError(Exception):
    """Base class for all toolkit errors."""


class DimensionError(SlspecError):
    """Matrix or vector dimensions incompatible with the requested operation."""


class SingularMatrixError(SlspecError):
    """Matrix singular to working tolerance.

    Carries the computed determinant so callers can report how close to
    singular the input was.
    """

    def __init__(self, message, det=None):
        super().__init__(message)
        self.det = det


class RankDeficiencyError(SlspecError):
    """Input vectors linearly dependent to tolerance."""


class DomainError(SlspecError):
    """Evaluation point outside the time interval of the system."""


class ConstructionError(SlspecError):
    """A derived object (frame, normalizer) could not be built from the inputs."""


class DegeneracyError(SlspecError):
    """Zero is an eigenvalue to tolerance; quotient/trace formulas are undefined."""


class UnsupportedOracleError(SlspecError):
    """Requested reference computation outside the oracle's validity domain."""


class ConfigError(SlspecError):
    """Malformed or inconsistent job configuration."""
