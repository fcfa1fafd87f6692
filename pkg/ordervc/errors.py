"""
Exception hierarchy for ordervc.

Every error carries the process exit code the CLI reports for it.
"""


class OrderVCError(Exception):
    exit_code = 2


class OutOfRange(OrderVCError, ValueError):
    """A vertex label outside 1..n, or an n that is not positive."""


class SelfLoop(OrderVCError, ValueError):
    """An edge (v, v)."""


class CyclicInput(OrderVCError, ValueError):
    """A directed cycle where an acyclic graph is required."""


class SizeMismatch(OrderVCError, ValueError):
    """Two values living on different ground sets [n]."""


class CapExceeded(OrderVCError):
    """An exhaustive routine asked to run beyond its size guard."""


class NotAMember(OrderVCError, KeyError):
    """An order that is not part of the queried family."""

    def __str__(self):
        return Exception.__str__(self)


class TooSmall(OrderVCError, ValueError):
    """A construction requested for an n it is not defined on."""


class StrategyFailure(OrderVCError):
    """A flipping strategy produced a cyclic graph."""

    exit_code = 1


class NotShattered(OrderVCError):
    exit_code = 1


class NoContradictionEdge(OrderVCError):
    exit_code = 1


class BudgetExhausted(OrderVCError):
    exit_code = 3


class ParseError(OrderVCError, ValueError):
    """Malformed JSON or YAML input."""


class InvariantViolation(OrderVCError, ValueError):
    """Well-formed input that breaks an order or certificate invariant."""
