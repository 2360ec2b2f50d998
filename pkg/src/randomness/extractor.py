"""Balancing extractors: spread outcome mass over M output bins.

Classes are visited by descending per-element probability. A class of N
elements gives floor(N / M) elements to every bin and its N mod M leftover
elements to the least-loaded bins, one each, lowest bin first. On outcomes of
distinct probability this is the plain "next outcome to the lightest bin"
rule.

Two evaluations of the same rule exist. :class:`Extractor` keeps an explicit
load per bin and is limited to ``MAX_MATERIALIZED_BINS``. The virtual form
keeps groups of bins sharing a load, with exact integer multiplicities and
log-domain loads, so M may be astronomically large.
"""

import heapq
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..core.errors import CapacityError, DomainError
from ..core.logweight import LOG_ZERO, log_add, log_int
from ..sources.types import TypeClassTable

logger = logging.getLogger(__name__)

MAX_MATERIALIZED_BINS = 10_000_000
# adding e^w to a load above e^(w + 40) cannot change its double value
NEGLIGIBLE_NATS = 40.0
HISTOGRAM_BUCKETS = 20
LISTED_LOADS_LIMIT = 1000


@dataclass(frozen=True, slots=True)
class ClassAssignment:
    """Where the elements of one class went: ``base`` to every bin, one more to each extra bin."""

    class_id: int
    base: int
    extra_bins: tuple[int, ...]

    def per_bin(self, size: int) -> list[int]:
        """Element count in every bin."""
        out = [self.base] * size
        for b in self.extra_bins:
            out[b] += 1
        return out


@dataclass(frozen=True, eq=False)
class Extractor:
    """Materialized extractor with one load per bin."""

    table: TypeClassTable
    size: int
    assignment: tuple[ClassAssignment, ...]
    loads: NDArray[np.float64]
    top_log: NDArray[np.float64]

    @property
    def n(self) -> int:
        """Block length."""
        return self.table.n

    @property
    def log_size(self) -> float:
        """log M."""
        return log_int(self.size)

    def profile(self) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """(log load, log multiplicity, log heaviest preimage) per bin."""
        with np.errstate(divide="ignore"):
            log_loads = np.where(self.loads > 0, np.log(np.where(self.loads > 0, self.loads, 1.0)), LOG_ZERO)
        return log_loads, np.zeros(self.size), self.top_log

    def recomputed_loads(self) -> NDArray[np.float64]:
        """Bin loads rebuilt from the assignment alone."""
        loads = np.zeros(self.size)
        elem = self.table.per_element_log_prob
        for a in self.assignment:
            w = math.exp(float(elem[a.class_id])) if elem[a.class_id] > LOG_ZERO else 0.0
            loads += a.base * w
            loads[list(a.extra_bins)] += w
        return loads


@dataclass(frozen=True, slots=True)
class LoadGroup:
    """``count`` bins sharing one load; ``top_log`` is their heaviest preimage element."""

    log_load: float
    count: int
    top_log: float


@dataclass(frozen=True, eq=False)
class VirtualExtractor:
    """Extractor described by groups of equally loaded bins."""

    n: int
    size: int
    groups: tuple[LoadGroup, ...]

    @property
    def log_size(self) -> float:
        """log M."""
        return log_int(self.size)

    def profile(self) -> tuple[NDArray[np.float64], NDArray[np.float64], NDArray[np.float64]]:
        """(log load, log multiplicity, log heaviest preimage) per group."""
        return (
            np.array([g.log_load for g in self.groups]),
            np.array([log_int(g.count) for g in self.groups]),
            np.array([g.top_log for g in self.groups]),
        )

    def rescaled(self, log_factor: float) -> "VirtualExtractor":
        """Same bins with every load (and preimage) multiplied by e^log_factor."""
        return VirtualExtractor(
            self.n,
            self.size,
            tuple(
                LoadGroup(g.log_load + log_factor, g.count, g.top_log + log_factor)
                for g in self.groups
            ),
        )


AnyExtractor = Extractor | VirtualExtractor


def build_extractor(
    table: TypeClassTable, size: int, max_bins: int = MAX_MATERIALIZED_BINS
) -> Extractor:
    """Materialized balancing extractor with ``size`` bins."""
    if size < 1:
        raise DomainError(f"extractor needs at least one bin, got {size}")
    if size > max_bins:
        raise CapacityError("materialized extractor", size, max_bins)
    loads = np.zeros(size)
    top_log = np.full(size, LOG_ZERO)
    counts = table.counts
    elem = table.per_element_log_prob
    assignment = []
    for c in table.order.tolist():
        base, rem = divmod(counts[c], size)
        w_log = float(elem[c])
        extra = np.argsort(loads, kind="stable")[:rem] if rem else np.array([], dtype=int)
        if w_log > LOG_ZERO:
            if base:
                loads += math.exp(log_int(base) + w_log)
                top_log = np.maximum(top_log, w_log)
            loads[extra] += math.exp(w_log)
            top_log[extra] = np.maximum(top_log[extra], w_log)
        assignment.append(ClassAssignment(c, base, tuple(int(b) for b in extra)))
    return Extractor(table, size, tuple(assignment), loads, top_log)


def build_virtual_extractor(
    table: TypeClassTable, size: int, classes: Sequence[int] | None = None
) -> VirtualExtractor:
    """Virtual balancing extractor; ``classes`` restricts (and orders) the input.

    Masses are used as they are, so a restricted extractor carries only the
    restricted classes' total probability.
    """
    if size < 1:
        raise DomainError(f"extractor needs at least one bin, got {size}")
    order = table.order.tolist() if classes is None else list(classes)
    counts = table.counts
    elem = table.per_element_log_prob
    base = LOG_ZERO
    base_top = LOG_ZERO
    # heap entries: (extra log load, sequence, bin count, heaviest element)
    heap: list[tuple[float, int, int, float]] = [(LOG_ZERO, 0, size, LOG_ZERO)]
    seq = 1
    for c in order:
        w = float(elem[c])
        if w == LOG_ZERO:
            continue
        q, r = divmod(counts[c], size)
        if q:
            base = log_add(base, log_int(q) + w)
            base_top = max(base_top, w)
        if r == 0 or w < log_add(base, heap[0][0]) - NEGLIGIBLE_NATS:
            continue
        updated = []
        left = r
        while left:
            extra, s, k, top = heapq.heappop(heap)
            if k > left:
                heapq.heappush(heap, (extra, s, k - left, top))
                k = left
            updated.append((log_add(extra, w), k, max(top, w)))
            left -= k
        for extra, k, top in updated:
            heapq.heappush(heap, (extra, seq, k, top))
            seq += 1
    groups = tuple(
        LoadGroup(log_add(base, extra), k, max(base_top, top))
        for extra, _, k, top in sorted(heap, key=lambda e: (e[0], e[1]))
    )
    logger.debug("virtual extractor with M=%s has %d load groups", size, len(groups))
    return VirtualExtractor(table.n, size, groups)


def injective_groups(table: TypeClassTable, classes: Sequence[int]) -> list[LoadGroup]:
    """One bin per element of the given classes."""
    elem = table.per_element_log_prob
    return [
        LoadGroup(float(elem[c]), table.counts[c], float(elem[c]))
        for c in classes
        if table.counts[c] > 0
    ]


def compose(
    table: TypeClassTable, injective: Sequence[int], spread: VirtualExtractor
) -> VirtualExtractor:
    """Output of a map that is injective on ``injective`` classes and ``spread`` elsewhere."""
    groups = injective_groups(table, injective)
    size = sum(g.count for g in groups) + spread.size
    return VirtualExtractor(table.n, size, tuple(groups) + spread.groups)


def ml_decoding_error(ext: AnyExtractor) -> float:
    """1 - mass recovered when each bin decodes to its most probable preimage."""
    _, log_counts, top_log = ext.profile()
    live = top_log > LOG_ZERO
    recovered = math.fsum(np.exp(log_counts[live] + top_log[live]).tolist())
    return min(1.0, max(0.0, 1.0 - recovered))


def loads_histogram(ext: AnyExtractor, buckets: int = HISTOGRAM_BUCKETS) -> dict[str, Any]:
    """Loads listed directly for small M, otherwise bucketed on M * load."""
    log_loads, log_counts, _ = ext.profile()
    if ext.size <= LISTED_LOADS_LIMIT:
        loads: list[float] = []
        for lv, lc in zip(log_loads.tolist(), log_counts.tolist(), strict=True):
            loads.extend([math.exp(lv)] * round(math.exp(lc)))
        return {"loads": loads}
    scaled = np.exp(log_loads + ext.log_size)
    weights = np.exp(log_counts - ext.log_size)
    fractions, edges = np.histogram(scaled, bins=buckets, weights=weights)
    return {"scaled_load_edges": edges.tolist(), "bin_fractions": fractions.tolist()}
