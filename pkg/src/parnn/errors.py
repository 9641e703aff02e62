"""Exception hierarchy shared across the package."""


class ParnnError(Exception):
    """Base class for all package errors."""


class SizingError(ParnnError, ValueError):
    """A series or design is too short for the requested operation."""


class DomainError(ParnnError, ValueError):
    """A value lies outside the domain of a transform."""


class ShapeError(ParnnError, ValueError):
    """Array dimensions do not agree."""


class UndefinedMetricError(ParnnError, ValueError):
    """An accuracy measure has a zero denominator."""


class DataError(ParnnError, ValueError):
    """Input file is missing, malformed or has unusable cells."""


class EstimationError(ParnnError, RuntimeError):
    """Model estimation failed.

    ``best_params`` carries the best parameter vector seen before failure,
    when one exists.
    """

    def __init__(self, message, best_params=None):
        super().__init__(message)
        self.best_params = best_params


class DivergenceError(EstimationError):
    """Training produced a non-finite loss."""

    def __init__(self, message, epoch, best_params=None):
        super().__init__(message, best_params)
        self.epoch = epoch


class SearchError(EstimationError):
    """No grid cell could be fitted and scored."""
