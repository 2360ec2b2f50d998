"""Uniformity criteria of extractor outputs and the finite-n bounds around them."""

import logging
import math
from enum import StrEnum
from typing import Any, NamedTuple

import numpy as np
from numpy.typing import NDArray

from ..core.bounds import BoundCheck
from ..core.errors import DomainError
from ..core.logweight import LOG_ZERO, ceil_exp, floor_exp, log_int
from ..sources.types import TypeClassTable
from .extractor import (
    AnyExtractor,
    build_virtual_extractor,
    loads_histogram,
)

logger = logging.getLogger(__name__)

LOG_SEARCH_TOLERANCE = 1e-9
EXACT_SEARCH_LIMIT = 1 << 50
SCAN_LIMIT = 4096


class KLDirection(StrEnum):
    """Which side of the divergence the uniform distribution sits on."""

    TO_UNIFORM = "to_uniform"
    FROM_UNIFORM = "from_uniform"


class Normalization(StrEnum):
    """Divisor applied to a divergence."""

    ONE = "one"
    INV_SQRT_N = "inv_sqrt_n"
    INV_N = "inv_n"

    def scale(self, n: int) -> float:
        """The divisor for block length n."""
        if self is Normalization.INV_SQRT_N:
            return math.sqrt(n)
        if self is Normalization.INV_N:
            return float(n)
        return 1.0


def _log_diff_abs(a: NDArray[np.float64], b: float) -> NDArray[np.float64]:
    hi = np.maximum(a, b)
    lo = np.minimum(a, b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = hi + np.log(-np.expm1(lo - hi))
    return np.where(a == b, LOG_ZERO, out)


def extractor_distance(ext: AnyExtractor) -> float:
    """Half the L1 distance between the bin loads and uniform on M bins."""
    log_loads, log_counts, _ = ext.profile()
    terms = np.exp(log_counts + _log_diff_abs(log_loads, -ext.log_size))
    return min(1.0, max(0.0, 0.5 * math.fsum(terms.tolist())))


def extractor_kl(
    ext: AnyExtractor,
    direction: KLDirection = KLDirection.TO_UNIFORM,
    normalization: Normalization = Normalization.ONE,
) -> float:
    """D(q||U_M) or D(U_M||q) for the bin loads q, divided per ``normalization``."""
    log_loads, log_counts, _ = ext.profile()
    log_m = ext.log_size
    if direction is KLDirection.TO_UNIFORM:
        live = log_loads > LOG_ZERO
        terms = np.exp(log_counts[live] + log_loads[live]) * (log_loads[live] + log_m)
        value = max(0.0, math.fsum(terms.tolist()))
    else:
        if np.any(log_loads == LOG_ZERO):
            return math.inf
        terms = np.exp(log_counts - log_m) * (-log_m - log_loads)
        value = max(0.0, math.fsum(terms.tolist()))
    return value / normalization.scale(ext.n)


def load_entropy(ext: AnyExtractor) -> float:
    """H(q) of the bin loads, as log M - D(q||U_M)."""
    return ext.log_size - extractor_kl(ext, KLDirection.TO_UNIFORM)


def extractor_summary(ext: AnyExtractor) -> dict[str, Any]:
    """JSON summary of an extractor."""
    return {
        "n": ext.n,
        "M": str(ext.size),
        "logM_nats": ext.log_size,
        "distance": extractor_distance(ext),
        "kl_to_uniform": extractor_kl(ext, KLDirection.TO_UNIFORM),
        "kl_from_uniform": extractor_kl(ext, KLDirection.FROM_UNIFORM),
        "loads_histogram": loads_histogram(ext),
    }


def distance_size_bound(table: TypeClassTable, log_m: float, log_m_prime: float) -> float:
    """p_n{p_n > 1/M'} + M/M'."""
    return table.mass_above(-log_m_prime) + math.exp(min(log_m - log_m_prime, 700.0))


def divergence_size_bound(heavy_mass: float, log_m: float, log_m_prime: float) -> float:
    """log M (M'/M + 1/M' + p{p > 1/M}), a bound on D(p o phi^-1 || U_M).

    ``heavy_mass`` is the mass of outcomes heavier than 1/M.
    """
    return log_m * (math.exp(log_m_prime - log_m) + math.exp(-log_m_prime) + heavy_mass)


def achievability_check_extractor(ext: AnyExtractor, table: TypeClassTable, log_m_prime: float) -> BoundCheck:
    """distance <= p_n{p_n > 1/M'} + M/M'."""
    return BoundCheck.upper(
        extractor_distance(ext), distance_size_bound(table, ext.log_size, log_m_prime)
    )


def converse_check_extractor(
    table: TypeClassTable, size: int, distance: float, size_prime: int
) -> BoundCheck:
    """distance >= p_n{p_n > 1/M'} - M'/M for any extractor of size M."""
    rhs = table.mass_above(-log_int(size_prime)) - math.exp(
        log_int(size_prime) - log_int(size)
    )
    return BoundCheck.lower(distance, rhs)


def converse_distance_floor(table: TypeClassTable, log_m: float) -> float:
    """Largest converse lower bound on the distance of any size-M extractor.

    Only thresholds just below a class probability matter, since the mass
    term jumps there while M'/M moves continuously.
    """
    order = table.order
    elem = table.per_element_log_prob[order]
    live = elem > LOG_ZERO
    head = 1.0 - table.sorted_tail_mass[1:][live]
    penalty = np.exp(np.minimum(-elem[live] - log_m, 700.0))
    if head.size == 0:
        return 0.0
    return max(0.0, float(np.max(head - penalty)))


class SizeSearch(NamedTuple):
    """Largest extractor size meeting a distance target."""

    log_size: float
    size: int
    distance: float
    converse_floor: float


def _virtual_distance(table: TypeClassTable, size: int) -> float:
    return extractor_distance(build_virtual_extractor(table, size))


def max_log_size_for_distance(table: TypeClassTable, eps: float) -> SizeSearch:
    """Largest M whose balancing extractor has distance <= eps.

    Small problems are scanned exhaustively, since the distance is not
    monotone in M at small sizes. Otherwise an exponential search on log M
    brackets the answer, bisection narrows it to ``LOG_SEARCH_TOLERANCE``
    and exact integer bisection finishes once M is small enough.
    """
    if not 0.0 < eps < 1.0:
        raise DomainError(f"eps must lie in (0, 1), got {eps}")
    # beyond total/(1-eps) bins the empty fraction alone exceeds eps
    ceiling = table.log_total_count - math.log1p(-eps) + 1.0
    if ceil_exp(ceiling) <= SCAN_LIMIT:
        size = max(
            m for m in range(1, ceil_exp(ceiling) + 1) if _virtual_distance(table, m) <= eps
        )
        log_size = log_int(size)
        return SizeSearch(
            log_size,
            size,
            _virtual_distance(table, size),
            converse_distance_floor(table, log_size),
        )

    def fits(log_m: float) -> bool:
        return _virtual_distance(table, floor_exp(log_m)) <= eps

    lo, step = 0.0, 1.0
    while lo + step < ceiling and fits(lo + step):
        lo += step
        step *= 2.0
    hi = min(lo + step, ceiling)
    steps = 0
    while hi - lo > LOG_SEARCH_TOLERANCE:
        mid = 0.5 * (lo + hi)
        if floor_exp(mid) == floor_exp(lo) or fits(mid):
            lo = mid
        else:
            hi = mid
        steps += 1
    size = max(1, floor_exp(lo))
    if size < EXACT_SEARCH_LIMIT:
        top = max(size + 1, ceil_exp(hi))
        while top - size > 1:
            mid_size = (size + top) // 2
            if _virtual_distance(table, mid_size) <= eps:
                size = mid_size
            else:
                top = mid_size
    distance = _virtual_distance(table, size)
    logger.debug("size search for eps=%g settled after %d log steps", eps, steps)
    log_size = log_int(size)
    return SizeSearch(log_size, size, distance, converse_distance_floor(table, log_size))
