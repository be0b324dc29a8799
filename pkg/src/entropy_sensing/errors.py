"""Exception hierarchy for the sensing library."""


class SensingError(Exception):
    """Base class for every error raised by this package."""


class EmptyRequestError(SensingError, ValueError):
    """A generator or estimator was asked for zero items."""


class UnsupportedLengthError(SensingError, ValueError):
    """The transform length is not a power of two."""


class InsufficientDataError(SensingError):
    """A frame source ran dry while the detector still needed a frame."""


class InsufficientTrialsError(SensingError, ValueError):
    """Too few Monte Carlo trials to resolve the requested quantile."""


class CalibrationRangeError(SensingError):
    """Threshold bisection could not bracket or reach the target rate."""


class ConfigurationError(SensingError, ValueError):
    """Inconsistent or incomplete experiment configuration."""
