"""Exception types raised across the package.

Validation errors derive from :class:`GdsError` (a ``ValueError``) so callers
can catch everything the toolkit raises for bad input with one clause.
"""


class GdsError(ValueError):
    """Base class for input validation errors."""


class CycleError(GdsError):
    """A graph that must be acyclic contains a directed cycle."""


class SelfLoopError(GdsError):
    """An edge (or parent entry) connects a vertex to itself."""


class ParamError(GdsError):
    """A parameter is outside its admissible range."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class DivergenceError(GdsError):
    """A simulated state left its admissible range."""


class ParseError(GdsError):
    """A data or configuration file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class EmptyError(GdsError):
    """A data file holds no usable rows."""


class DegenerateSeriesError(GdsError):
    """A series cannot be binned (constant, or too few distinct values)."""


class TooShortError(GdsError):
    """A series is too short for the requested embedding or neighbour count."""


class EmptyTableError(GdsError):
    """An entropy was requested from a count table with no transitions."""


class TooLargeError(GdsError):
    """Exhaustive enumeration was requested for too many vertices."""
