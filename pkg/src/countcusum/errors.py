"""Exception hierarchy."""


class CountcusumError(Exception):
    """Base class for all package errors."""


class ConfigError(CountcusumError, ValueError):
    """Invalid configuration: unknown format tag, bad option, bad groups file."""


class ParseError(CountcusumError, ValueError):
    """A record file line could not be parsed."""

    def __init__(self, line: int, reason: str):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class SeriesTooShortError(CountcusumError, ValueError):
    """The series has fewer observations than the operation needs."""


class ZeroVarianceError(CountcusumError, ValueError):
    """The series is constant, so a normalised statistic is undefined."""
