from typing import Iterable, Optional, Tuple


class KinexError(Exception):
    """Base class for every error raised by kinex."""


class ConfigurationError(KinexError, ValueError):
    """Invalid simulation or experiment parameters."""

    def __init__(self, message: str, fields: Iterable[str] = ()):
        super().__init__(message)
        self.fields: Tuple[str, ...] = tuple(fields)


class ConfigParseError(ConfigurationError):
    """Config file is not well-formed JSON."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class UsageError(KinexError, ValueError):
    """An operation was called with arguments outside its contract."""


class InsufficientDataError(KinexError, ValueError):
    """Too few samples for the requested estimate."""

    def __init__(self, message: str, required: int, available: int):
        super().__init__(f"{message}: need {required}, have {available}")
        self.required = required
        self.available = available


class DegenerateFitError(KinexError, ValueError):
    """The estimate collapsed to a boundary value (e.g. zero temperature)."""


class OutputError(KinexError, OSError):
    """Writing or reading an output file failed."""

    def __init__(self, path: str, reason: str, cause: Optional[BaseException] = None):
        super().__init__(f"{path}: {reason}")
        self.path = path
        self.__cause__ = cause
