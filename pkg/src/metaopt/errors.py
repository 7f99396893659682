"""Exception hierarchy shared by every module in the package."""


class MetaOptError(Exception):
    """Base class for all errors raised by metaopt."""


class ConfigurationError(MetaOptError, ValueError):
    """Invalid configuration, shapes, or mutually inconsistent inputs."""


class NumericDomainError(MetaOptError, ArithmeticError):
    """Non-finite values where finite ones are required."""


class CheckpointFormatError(MetaOptError, ValueError):
    """Malformed checkpoint file."""

    def __init__(self, path, line, reason):
        self.path = str(path)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.path}:{line}: {reason}")


class InputError(MetaOptError):
    """A required input file is missing or unreadable."""
