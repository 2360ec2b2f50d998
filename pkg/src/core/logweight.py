"""Log-domain weights and exact integer exponentials.

All magnitudes are natural logarithms. Zero is represented by ``LOG_ZERO``
(minus infinity), never by a large negative finite number.
"""

import math
from collections.abc import Iterable
from dataclasses import dataclass
from decimal import ROUND_CEILING, ROUND_FLOOR, Context, Decimal

import numpy as np

LOG_ZERO = float("-inf")
LOG_ONE = 0.0

# e^x above this cannot be held in a double; fall back to decimal arithmetic.
_FLOAT_EXP_LIMIT = 700.0
# exp(log(k)) may land a few ulps away from the integer k.
_ROUNDING_SLACK = 1e-12
_DECIMAL = Context(prec=60)


@dataclass(frozen=True, slots=True)
class LogWeight:
    """A non-negative magnitude stored as its natural logarithm."""

    value: float = LOG_ZERO

    @classmethod
    def from_linear(cls, x: float) -> "LogWeight":
        """Build from a linear-domain magnitude."""
        if x < 0:
            raise ValueError(f"LogWeight cannot hold a negative value: {x}")
        return cls(math.log(x) if x > 0 else LOG_ZERO)

    @property
    def is_zero(self) -> bool:
        """True for the zero sentinel."""
        return self.value == LOG_ZERO

    def linear(self) -> float:
        """Linear-domain value (may underflow to 0.0)."""
        return math.exp(self.value)

    def __add__(self, other: "LogWeight") -> "LogWeight":
        return LogWeight(log_add(self.value, other.value))

    def __mul__(self, other: "LogWeight") -> "LogWeight":
        if self.is_zero or other.is_zero:
            return LogWeight()
        return LogWeight(self.value + other.value)

    def __lt__(self, other: "LogWeight") -> bool:
        return self.value < other.value


def log_add(a: float, b: float) -> float:
    """log(e^a + e^b) with the zero sentinel handled exactly."""
    if a == LOG_ZERO:
        return b
    if b == LOG_ZERO:
        return a
    if a < b:
        a, b = b, a
    return a + math.log1p(math.exp(b - a))


def log_sum(values: Iterable[float]) -> float:
    """log of the sum of e^v over ``values``.

    Terms are sorted ascending and accumulated with ``math.fsum`` relative to
    the largest term, so the relative error stays near machine precision even
    for millions of terms.
    """
    arr = np.sort(np.asarray(list(values), dtype=float))
    arr = arr[arr > LOG_ZERO]
    if arr.size == 0:
        return LOG_ZERO
    top = float(arr[-1])
    if math.isinf(top):
        return top
    return top + math.log(math.fsum(np.exp(arr - top).tolist()))


def log_diff_abs(a: float, b: float) -> float:
    """log|e^a - e^b|."""
    if a == b:
        return LOG_ZERO
    if a < b:
        a, b = b, a
    if b == LOG_ZERO:
        return a
    return a + math.log(-math.expm1(b - a))


def log_int(k: int) -> float:
    """Natural log of a (possibly huge) non-negative integer."""
    return math.log(k) if k > 0 else LOG_ZERO


def log1m_exp(x: float) -> float:
    """log(1 - e^x) for x <= 0."""
    if x > 0:
        raise ValueError(f"log1m_exp needs x <= 0, got {x}")
    if x == 0:
        return LOG_ZERO
    if x > -math.log(2):
        return math.log(-math.expm1(x))
    return math.log1p(-math.exp(x))


def floor_exp(x: float) -> int:
    """floor(e^x) as an exact Python integer, for any finite x."""
    if x == LOG_ZERO:
        return 0
    if x < _FLOAT_EXP_LIMIT:
        v = math.exp(x)
        r = round(v)
        if abs(v - r) <= _ROUNDING_SLACK * max(1.0, v):
            return int(r)
        return math.floor(v)
    d = _DECIMAL.exp(Decimal(x))
    return int(d.to_integral_value(rounding=ROUND_FLOOR))


def ceil_exp(x: float) -> int:
    """ceil(e^x) as an exact Python integer, for any finite x."""
    if x == LOG_ZERO:
        return 0
    if x < _FLOAT_EXP_LIMIT:
        v = math.exp(x)
        r = round(v)
        if abs(v - r) <= _ROUNDING_SLACK * max(1.0, v):
            return int(r)
        return math.ceil(v)
    d = _DECIMAL.exp(Decimal(x))
    return int(d.to_integral_value(rounding=ROUND_CEILING))
