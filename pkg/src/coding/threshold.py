"""Fixed-length threshold codes: keep the M most probable outcomes.

Sizes are carried as natural logs because M ~ e^{nH} overflows any machine
integer. Within a type class every outcome is equally likely, so a code is
fully described by how many elements of each class it keeps.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..core.bounds import BoundCheck
from ..core.errors import DomainError
from ..core.logweight import LOG_ZERO, floor_exp, log_int
from ..sources.types import TypeClassTable

logger = logging.getLogger(__name__)

EXACT_SIZE_BITS = 64


@dataclass(frozen=True, eq=False)
class ThresholdCode:
    """Retained outcomes of a threshold code and its exact error.

    ``retained`` lists (class id, kept elements) in decoding priority; only the
    last entry may keep part of its class. The decoder is the identity on
    retained outcomes and maps everything else to one junk symbol.
    """

    table: TypeClassTable
    log_size: float
    retained: tuple[tuple[int, int], ...]
    error: float

    @property
    def n(self) -> int:
        """Block length."""
        return self.table.n

    @property
    def exact_size(self) -> int | None:
        """Number of retained outcomes when it fits in 64 bits."""
        size = sum(kept for _, kept in self.retained)
        return size if size.bit_length() <= EXACT_SIZE_BITS else None

    def to_json(self) -> dict[str, Any]:
        """Summary without the codebook."""
        return {
            "n": self.n,
            "logM_nats": self.log_size,
            "error": self.error,
            "retained_classes": [
                {"composition": self.table.describe_class(c), "kept": str(kept)}
                for c, kept in self.retained
            ],
        }


def build_threshold_code(table: TypeClassTable, log_m: float) -> ThresholdCode:
    """Retain floor(e^log_m) outcomes, most probable first."""
    if log_m < 0:
        raise DomainError(f"log size must be >= 0, got {log_m}")
    budget = floor_exp(log_m)
    counts = table.counts
    retained: list[tuple[int, int]] = []
    for c in table.order.tolist():
        if budget == 0:
            break
        take = min(counts[c], budget)
        retained.append((c, take))
        budget -= take
    error = _error_after(table, retained)
    return ThresholdCode(
        table=table,
        log_size=log_int(sum(kept for _, kept in retained)),
        retained=tuple(retained),
        error=error,
    )


def _error_after(table: TypeClassTable, retained: list[tuple[int, int]]) -> float:
    """1 - retained mass, from the sorted tail plus the partial class."""
    if not retained:
        return 1.0
    k = len(retained)
    last, kept = retained[-1]
    missing = table.counts[last] - kept
    partial = 0.0
    if missing > 0 and table.per_element_log_prob[last] > LOG_ZERO:
        partial = math.exp(log_int(missing) + float(table.per_element_log_prob[last]))
    return min(1.0, max(0.0, float(table.sorted_tail_mass[k]) + partial))


def min_size_for_error(table: TypeClassTable, eps: float) -> int:
    """Smallest M >= 1 whose threshold code has error <= eps."""
    if not 0.0 <= eps < 1.0:
        raise DomainError(f"eps must lie in [0, 1), got {eps}")
    order = table.order.tolist()
    counts = table.counts
    elem = table.per_element_log_prob
    if eps == 0.0:
        return sum(counts[c] for c in order if elem[c] > LOG_ZERO)
    tail = table.sorted_tail_mass
    # first i with tail[i] <= eps: classes before i must be (at least partly) kept
    i = int(np.searchsorted(-tail, -eps, side="left"))
    if i == 0:
        return 1
    j = i - 1
    c = order[j]
    spare = eps - float(tail[i])
    dropped = floor_exp(math.log(spare) - float(elem[c])) if spare > 0 else 0
    keep = max(1, counts[c] - dropped)
    size = sum(counts[order[k]] for k in range(j)) + keep
    logger.debug("eps=%g needs %d full classes plus %d elements", eps, j, keep)
    return size


def min_log_size_for_error(table: TypeClassTable, eps: float) -> float:
    """log of :func:`min_size_for_error`."""
    return log_int(min_size_for_error(table, eps))


def converse_check_code(
    table: TypeClassTable, log_m: float, error: float, log_m_prime: float
) -> BoundCheck:
    """1 - error <= p_n{p_n > 1/M'} + M/M'."""
    rhs = table.mass_above(-log_m_prime) + math.exp(min(log_m - log_m_prime, 700.0))
    return BoundCheck.upper(1.0 - error, rhs)


def achievability_check_code(code: ThresholdCode) -> BoundCheck:
    """1 - error >= p_n{p_n > 1/M} for the code's own size."""
    return BoundCheck.lower(1.0 - code.error, code.table.mass_above(-code.log_size))


def second_order_coefficient(log_m: float, n: int, a: float) -> float:
    """(log M - n a) / sqrt(n)."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return (log_m - n * a) / math.sqrt(n)


def code_error_curve(table: TypeClassTable, log_sizes: list[float]) -> list[float]:
    """Threshold-code errors along a list of log sizes."""
    return [build_threshold_code(table, lm).error for lm in log_sizes]
