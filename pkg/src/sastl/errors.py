"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class SaSTLError(Exception):
    """Base class for all errors raised by this package."""


class GraphError(SaSTLError, ValueError):
    """Malformed location graph (bad weight, dangling edge, duplicate node)."""


class UnknownLocationError(SaSTLError, LookupError):
    def __init__(self, location):
        super().__init__(f"unknown location {location!r}")
        self.location = location

    def __reduce__(self):
        return (type(self), (self.location,))


class UnknownVariableError(SaSTLError, LookupError):
    def __init__(self, variable):
        super().__init__(f"unknown variable {variable!r}")
        self.variable = variable

    def __reduce__(self):
        return (type(self), (self.variable,))


class SignalFormatError(SaSTLError, ValueError):
    """Bad signal data; ``line`` is the 1-based line of the offending row."""

    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)
        self.message = message
        self.line = line

    def __reduce__(self):
        return (type(self), (self.message, self.line))


class ParseError(SaSTLError, ValueError):
    """Syntax error in a formula, with 1-based line/column of the failure."""

    def __init__(self, message, text="", pos=0, expected=(), line_offset=0):
        self.message = message
        self.text = text
        self.pos = pos
        self.expected = tuple(expected)
        self.line_offset = line_offset
        self.line = text.count("\n", 0, pos) + 1 + line_offset
        self.column = pos - (text.rfind("\n", 0, pos) + 1) + 1
        detail = f"{message} at line {self.line}, column {self.column}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)

    def __reduce__(self):
        return (type(self), (self.message, self.text, self.pos, self.expected, self.line_offset))
