"""Exception hierarchy shared by every module."""


class ProgBCError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(ProgBCError):
    def __init__(self, lineno, line, reason="malformed token"):
        self.lineno = lineno
        self.line = line
        super().__init__(f"line {lineno}: {reason}: {line!r}")


class EmptyGraphError(ProgBCError):
    pass


class DegenerateGraphError(ProgBCError):
    pass


class ParameterError(ProgBCError, ValueError):
    pass


class IntegrityError(ProgBCError):
    pass


class OracleTimeout(ProgBCError):
    pass
