"""Exact type-class representation of product distributions P^n.

Every string of length n with the same composition (symbol counts) has the
same probability under P^n, so P^n is summarized by one row per composition:
the log of the class cardinality, the per-element log-probability and the
class log-probability.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING

import numpy as np
from numpy.typing import NDArray
from scipy.special import gammaln, xlogy

from ..core.distribution import FiniteDistribution
from ..core.errors import CapacityError, DomainError, InvalidDistributionError
from ..core.logweight import LOG_ZERO, log_sum

if TYPE_CHECKING:
    from ..database.manager import TableCache

logger = logging.getLogger(__name__)

MAX_COMPOSITIONS = 10_000_000
TOTAL_PROBABILITY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class TypeClassTable:
    """Per-class summary of a distribution on n-blocks.

    Classes appear in lexicographic order of their composition. For tables
    built from an explicit outcome list, ``compositions`` has zero columns and
    ``class_labels`` names the outcomes instead.
    """

    n: int
    alphabet_size: int
    compositions: NDArray[np.int64]
    log_count: NDArray[np.float64]
    per_element_log_prob: NDArray[np.float64]
    class_log_prob: NDArray[np.float64]
    class_labels: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        total = log_sum(self.class_log_prob.tolist())
        if abs(math.expm1(total)) > TOTAL_PROBABILITY_TOLERANCE:
            raise InvalidDistributionError(
                f"type classes carry total probability {math.exp(total)!r}"
            )

    @property
    def num_classes(self) -> int:
        """Number of classes (rows)."""
        return int(self.log_count.size)

    @cached_property
    def counts(self) -> list[int]:
        """Exact class cardinalities as Python integers."""
        if self.class_labels is not None:
            return [1] * self.num_classes
        return exact_class_counts(self.compositions)

    @cached_property
    def log_total_count(self) -> float:
        """log of the number of outcomes (d^n for a full product table)."""
        return log_sum(self.log_count.tolist())

    @cached_property
    def order(self) -> NDArray[np.int64]:
        """Class indices by descending per-element probability (stable)."""
        return np.argsort(-self.per_element_log_prob, kind="stable")

    @cached_property
    def class_mass(self) -> NDArray[np.float64]:
        """Linear class probabilities."""
        return np.exp(self.class_log_prob)

    @cached_property
    def sorted_tail_mass(self) -> NDArray[np.float64]:
        """tail[i] = mass of sorted classes i, i+1, ...; tail[C] = 0.

        Accumulated from the small end so tiny tails keep their precision.
        """
        mass = self.class_mass[self.order]
        tail = np.zeros(mass.size + 1)
        acc = 0.0
        for i in range(mass.size - 1, -1, -1):
            acc += float(mass[i])
            tail[i] = acc
        return tail

    def describe_class(self, index: int) -> list[int] | str:
        """Composition (or outcome label) of a class, for reports."""
        if self.class_labels is not None:
            return self.class_labels[index]
        return [int(k) for k in self.compositions[index]]

    def mass_where(self, mask: NDArray[np.bool_]) -> float:
        """Total probability of the classes selected by ``mask``."""
        return math.fsum(self.class_mass[mask].tolist())

    def mass_above(self, log_threshold: float) -> float:
        """p_n{p_n(w) > e^log_threshold}, strict."""
        return self.mass_where(self.per_element_log_prob > log_threshold)


@lru_cache(maxsize=32)
def _compositions(n: int, d: int) -> NDArray[np.int64]:
    if d == 1:
        return np.array([[n]], dtype=np.int64)
    blocks = []
    for first in range(n + 1):
        rest = _compositions(n - first, d - 1)
        head = np.full((rest.shape[0], 1), first, dtype=np.int64)
        blocks.append(np.hstack([head, rest]))
    out = np.vstack(blocks)
    out.setflags(write=False)
    return out


def composition_count(n: int, d: int) -> int:
    """Number of compositions of n into d ordered non-negative parts."""
    return math.comb(n + d - 1, d - 1)


def enumerate_compositions(
    n: int, d: int, max_compositions: int = MAX_COMPOSITIONS
) -> NDArray[np.int64]:
    """All compositions of n into d parts, lexicographic, one per row."""
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    required = composition_count(n, d)
    if required > max_compositions:
        raise CapacityError("type-class table", required, max_compositions)
    return _compositions(n, d)


def log_multinomial(compositions: NDArray[np.int64]) -> NDArray[np.float64]:
    """log(n! / prod k_i!) per row, via log-gamma."""
    n = compositions.sum(axis=1)
    result: NDArray[np.float64] = gammaln(n + 1.0) - gammaln(compositions + 1.0).sum(
        axis=1
    )
    return result


def exact_class_counts(compositions: NDArray[np.int64]) -> list[int]:
    """Exact multinomial coefficients as Python integers."""
    rows = compositions.tolist()
    if compositions.shape[1] == 2:
        # binary tables: walk the binomial row by exact recurrence
        n = rows[0][0] + rows[0][1] if rows else 0
        binom = [1] * (n + 1)
        for k in range(n):
            binom[k + 1] = binom[k] * (n - k) // (k + 1)
        return [binom[r[0]] for r in rows]
    counts = []
    for row in rows:
        remaining = sum(row)
        c = 1
        for k in row:
            c *= math.comb(remaining, k)
            remaining -= k
        counts.append(c)
    return counts


def iid_type_table(
    p: FiniteDistribution,
    n: int,
    *,
    max_compositions: int = MAX_COMPOSITIONS,
    cache: "TableCache | None" = None,
) -> TypeClassTable:
    """Exact type-class table of P^n."""
    if cache is not None:
        hit = cache.get_table(p, n)
        if hit is not None:
            logger.debug("type table cache hit for n=%d", n)
            return hit
    comps = enumerate_compositions(n, p.size, max_compositions)
    log_count = log_multinomial(comps)
    # xlogy gives 0 for k = 0 even when P = 0; k > 0 with P = 0 is -inf
    with np.errstate(divide="ignore"):
        per_elem = xlogy(comps, p.probs[np.newaxis, :]).sum(axis=1)
    per_elem = np.where(np.isnan(per_elem), LOG_ZERO, per_elem)
    table = TypeClassTable(
        n=n,
        alphabet_size=p.size,
        compositions=comps,
        log_count=log_count,
        per_element_log_prob=per_elem,
        class_log_prob=log_count + per_elem,
    )
    if cache is not None:
        cache.put_table(p, n, table)
    return table


def outcome_table(p: FiniteDistribution, n: int = 1) -> TypeClassTable:
    """Table with one singleton class per outcome of an explicit distribution."""
    return TypeClassTable(
        n=n,
        alphabet_size=p.size,
        compositions=np.zeros((p.size, 0), dtype=np.int64),
        log_count=np.zeros(p.size),
        per_element_log_prob=p.log_probs.copy(),
        class_log_prob=p.log_probs.copy(),
        class_labels=p.labels,
    )
