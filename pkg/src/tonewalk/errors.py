"""Exception types shared across the toolkit."""


class TonewalkError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(TonewalkError, ValueError):
    """A configuration value is missing, malformed or out of range."""


class DataFormatError(TonewalkError, ValueError):
    """An input file does not match the expected sample/CSV layout."""


class InsufficientHeadroomError(TonewalkError, ValueError):
    """A stable walk would leave the effective frequency band within K steps.

    Stable scenarios must not wrap around the band edges, so generation
    fails loudly instead of aliasing the pivot sequence.
    """


class DegenerateSeriesError(TonewalkError, ValueError):
    """A difference series is constant, so variance-based statistics are undefined."""


class InvalidDofError(TonewalkError, ValueError):
    """The degrees-of-freedom estimate is non-positive (kurtosis too small)."""
