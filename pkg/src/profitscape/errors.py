"""Exception types shared across the package."""


class ProfitscapeError(Exception):
    """Base class for all package errors."""


class ConfigError(ProfitscapeError, ValueError):
    """Invalid strategy, experiment or generator configuration."""


class ValidationError(ProfitscapeError, ValueError):
    """Data violates a domain invariant (non-positive price, short series, ...)."""


class ParseError(ProfitscapeError, ValueError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class InsufficientDataError(ProfitscapeError, ValueError):
    """Too few usable points for a power-law fit."""
