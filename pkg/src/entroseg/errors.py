"""Exception types shared across the engine.

The CLI maps these onto its three diagnostic categories: argument
errors (bad flags / out-of-range values), format errors (malformed
files), and io errors (everything the OS refuses to do).
"""


class EngineError(Exception):
    """Base class for errors raised by this package."""


class FormatError(EngineError):
    """A file exists but its contents violate the declared format."""


class ArgumentError(EngineError):
    """A value breaks an operation's precondition."""
