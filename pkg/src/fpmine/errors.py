"""Exception hierarchy shared by every fpmine module."""


class FpmineError(Exception):
    """Base class for all fpmine errors."""


class ConfigError(FpmineError):
    """Bad configuration: missing roots, non-git directory, unreadable config file."""


class ParseError(FpmineError):
    """A source file could not be parsed; the file is excluded from metrics."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else path
        super().__init__(f"{where}: {message}")


class ConsistencyError(FpmineError):
    """Aggregation inputs disagree, such as an occurrence pointing at an unknown file."""


class GitError(FpmineError):
    """A git plumbing command failed."""
