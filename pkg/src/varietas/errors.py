"""Exception types shared across the workbench."""

from __future__ import annotations


class VarietasError(Exception):
    """Base class for all workbench errors."""


class SortError(VarietasError):
    """A term, identity or table failed a sort/arity check.

    Carries an optional path into the offending term (argument positions
    from the root) so callers can point at the exact subterm.
    """

    def __init__(self, message, path=()):
        self.path = tuple(path)
        if self.path:
            message = f"{message} (at argument path {list(self.path)})"
        super().__init__(message)


class ParseError(VarietasError):
    """DSL syntax or reference error, with 1-based line/column."""

    def __init__(self, message, line, column):
        self.line = line
        self.column = column
        super().__init__(f"{line}:{column}: {message}")


class ValidationError(VarietasError):
    """A constructed object violates one of its invariants."""


class ResourceLimitError(VarietasError):
    """A brute-force enumeration exceeded the configured ceiling."""

    def __init__(self, what, needed, limit):
        self.what = what
        self.needed = needed
        self.limit = limit
        super().__init__(f"resource guard: {what} needs {needed} > limit {limit}")
