"""Result type shared by the finite-n inequality checkers."""

from typing import NamedTuple

BOUND_SLACK = 1e-12


class BoundCheck(NamedTuple):
    """Both sides of an inequality ``lhs <= rhs`` and whether it holds."""

    lhs: float
    rhs: float
    holds: bool

    @classmethod
    def upper(cls, lhs: float, rhs: float) -> "BoundCheck":
        """Check lhs <= rhs up to the shared slack."""
        return cls(lhs, rhs, lhs <= rhs + BOUND_SLACK)

    @classmethod
    def lower(cls, lhs: float, rhs: float) -> "BoundCheck":
        """Check lhs >= rhs up to the shared slack."""
        return cls(lhs, rhs, lhs >= rhs - BOUND_SLACK)
