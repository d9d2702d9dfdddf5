"""Exception hierarchy for the fading BRW toolkit.

All errors derive from ``FadingBRWError`` which is itself a ``ValueError``, so
callers that only guard against bad input keep working.
"""


class FadingBRWError(ValueError):
    """Base class for every error raised by this package."""


class ParameterOutOfRange(FadingBRWError):
    """A parameter lies outside the range for which the object is defined."""


class UnboundedPositiveMean(FadingBRWError):
    """The positive part of the increment law has infinite mean (m_{G+} = inf)."""


class NotLongTailed(FadingBRWError):
    """The law is not long-tailed, so no insensitivity scale exists."""


class DivergentQSeries(FadingBRWError):
    """The non-unit probabilities q_n are not summable."""


class NonFadingEnvironment(FadingBRWError):
    """The branching environment does not fade (L = inf)."""


class Inconclusive(FadingBRWError):
    """A convergence criterion cannot be decided from the available information."""


class NotRealizedWithinCap(FadingBRWError):
    """A stopping rule did not fire within the supplied observations."""


class NonSummable(FadingBRWError):
    """An H-series has no finite value (flat boundary with unbounded weights)."""


class CalibrationFailed(FadingBRWError):
    """Big-jump and crude estimates disagree at the calibration level."""


class HypothesisViolation(FadingBRWError):
    """An experiment's configuration does not satisfy the theorem it verifies."""


class ConfigError(FadingBRWError):
    """Malformed experiment configuration."""
