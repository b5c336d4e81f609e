"""Exception types shared across the package."""


class DqnimbError(Exception):
    """Base class for every error raised by this package."""


class InputError(DqnimbError, ValueError):
    """An argument violates an operation's preconditions."""


class ProtocolError(DqnimbError, RuntimeError):
    """An API was driven out of order, e.g. step() after a terminal transition."""


class ParseError(InputError):
    """A text data file could not be parsed; the message names the offending row."""


class FormatError(InputError):
    """A binary or structured file does not follow its declared encoding."""


class ConfigError(DqnimbError):
    """An experiment configuration is invalid. Raised before any training starts;
    the CLI maps this to exit code 2."""
