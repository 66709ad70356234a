"""Exception hierarchy shared across the package."""


class SpikeStepError(Exception):
    """Base class for all errors raised by spikestep."""


class ShapeError(SpikeStepError, ValueError):
    """Array dimensions are incompatible with the requested operation."""


class NumericError(SpikeStepError, ValueError):
    """Non-finite values were passed where finite ones are required."""


class ConfigurationError(SpikeStepError, ValueError):
    """A parameter or configuration value is missing or out of range."""


class DataError(SpikeStepError, ValueError):
    """Input data (events, files) is malformed or out of bounds."""


class FormatError(SpikeStepError, ValueError):
    """A persisted file does not match the expected binary/text layout."""
