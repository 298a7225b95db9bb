"""Exception types shared across the package."""


class HiverankError(Exception):
    """Base class for all package errors."""


class ShapeError(HiverankError, ValueError):
    """Array dimensions do not match what an operation requires."""


class NumericError(HiverankError, ValueError):
    """Non-finite values where finite reals are required."""


class ConfigError(HiverankError, ValueError):
    """A configuration value is out of its valid range."""


class DataFormatError(HiverankError, ValueError):
    """A data file does not parse as its documented format."""

    def __init__(self, message, path=None, line=None):
        if path is not None and line is not None:
            message = f"{path}:{line}: {message}"
        elif path is not None:
            message = f"{path}: {message}"
        super().__init__(message)
        self.path = path
        self.line = line


class StateError(HiverankError, RuntimeError):
    """An operation was called before the state it depends on exists."""


class CheckpointError(HiverankError, ValueError):
    """A checkpoint file is invalid or incompatible with the current model."""
