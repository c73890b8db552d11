"""Exception types shared across the package."""


class QbagError(Exception):
    """Base class for all domain errors raised by this package."""


class GraphFormatError(QbagError):
    """Malformed graph document or structurally invalid graph."""


class UnknownArgumentError(QbagError):
    """An operation referenced an argument id not present in the graph."""


class DomainError(QbagError):
    """A base score lies outside the strength domain of the semantics."""


class InvalidChangeError(QbagError):
    """A strength change entry is invalid (equals the current base score,
    violates the domain, or names an unknown argument)."""


class CyclicGraphError(QbagError):
    """The operation requires an acyclic graph."""


class UndefinedStrengthError(QbagError):
    """A final strength needed by the operation is undefined."""


class BudgetError(QbagError):
    """A brute-force enumeration exceeded its configured budget."""
