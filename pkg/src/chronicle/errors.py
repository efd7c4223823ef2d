"""Exception hierarchy shared by every module of the package."""


class ChronicleError(ValueError):
    """Base class for all errors raised by this package."""


class FormatError(ChronicleError):
    """Input file is missing a column or holds unparseable fields."""


class DataQualityError(ChronicleError):
    """Input data has a gap or defect the ingestion rules refuse to repair."""


class DomainError(ChronicleError):
    """A value lies outside the domain of a transform (e.g. log of a nonpositive price)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ConfigError(ChronicleError):
    """Estimator or policy parameters are infeasible."""


class SizeError(ChronicleError):
    """A series is too short for the requested window."""


class GridError(ChronicleError):
    """Chronicles do not share a compatible sampling grid."""
