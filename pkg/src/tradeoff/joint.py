"""Joint code/extractor pairs and the exact error trade-off.

For any encoder, the decoding error of the code plus the distance of the
encoder's output from uniform is at least delta(p_n), the distance of p_n from
the closest uniform distribution on a subset of outcomes.
"""

import bisect
import logging
import math
from dataclasses import dataclass
from itertools import accumulate
from typing import Any, NamedTuple

from ..coding.threshold import ThresholdCode
from ..core.bounds import BOUND_SLACK
from ..core.distribution import FiniteDistribution
from ..core.errors import HypothesisError
from ..core.logweight import LOG_ZERO, floor_exp, log_int, log_sum
from ..randomness.criteria import extractor_distance
from ..randomness.extractor import (
    VirtualExtractor,
    build_virtual_extractor,
    compose,
    ml_decoding_error,
)
from ..sources.types import TypeClassTable, outcome_table

logger = logging.getLogger(__name__)

CSV_HEADER = ("n", "a", "b", "code_error", "extractor_distance", "sum", "delta_pn")


def _as_table(p: FiniteDistribution | TypeClassTable) -> TypeClassTable:
    return outcome_table(p) if isinstance(p, FiniteDistribution) else p


class _SortedClasses:
    """Prefix structure over classes sorted by descending probability."""

    def __init__(self, table: TypeClassTable):
        order = [c for c in table.order.tolist() if table.per_element_log_prob[c] > LOG_ZERO]
        self.counts = [table.counts[c] for c in order]
        self.elem = [float(table.per_element_log_prob[c]) for c in order]
        self.surprisal = [-e for e in self.elem]
        # prefix[j] = number of elements in classes 0..j-1
        self.prefix = [0, *accumulate(self.counts)]
        self.tail = table.sorted_tail_mass[: len(order) + 1].tolist()
        self.total = self.prefix[-1]

    def gap(self, m: int) -> float:
        """sum over the m most probable outcomes of (1/m - p)+."""
        j = bisect.bisect_left(self.prefix, m) - 1
        t = m - self.prefix[j]
        log_m = log_int(m)
        # leading classes whose elements weigh at least 1/m
        h = bisect.bisect_right(self.surprisal, log_m)
        if h > j:
            return 0.0
        heavy_count = self.prefix[h]
        light_mass = self.tail[h] - self.tail[j] + math.exp(log_int(t) + self.elem[j])
        return max(0.0, (m - heavy_count) / m - light_mass)

    def candidates(self) -> set[int]:
        """Sizes where the gap can attain its minimum."""
        out = set()
        for j, k in enumerate(self.counts):
            out.add(self.prefix[j] + 1)
            out.add(self.prefix[j] + k)
        for e in self.elem:
            cross = floor_exp(-e)
            out.update((cross, cross + 1))
        return {m for m in out if 1 <= m <= self.total}


def delta_uniform_gap(p: FiniteDistribution | TypeClassTable) -> tuple[float, int]:
    """min over subsets S of d(p, U_S), and the optimal |S|.

    For a fixed size m the best S is the m most probable outcomes, and the
    distance reduces to the total shortfall of its members below 1/m. Between
    class boundaries and the sizes where 1/m crosses a class probability the
    shortfall has no interior minimum, so only those sizes are scanned.
    """
    classes = _SortedClasses(_as_table(p))
    best, best_m = math.inf, 1
    for m in sorted(classes.candidates()):
        g = classes.gap(m)
        if g < best:
            best, best_m = g, m
    return min(1.0, best), best_m


@dataclass(frozen=True, eq=False)
class JointPair:
    """A code and an extractor that share one encoder.

    The encoder is one-to-one on S_n(a, b) = {-(1/n) log p_n < a + b/sqrt(n)}
    and spreads the complement over M-hat further bins with the balancing
    rule. The code decodes each spread bin to its most probable preimage.
    """

    table: TypeClassTable
    a: float
    b: float
    gamma_n: float
    code: ThresholdCode
    extractor_view: VirtualExtractor
    epsilon_n: float
    injective_size: int
    spread_size: int

    @property
    def n(self) -> int:
        """Block length."""
        return self.table.n

    @property
    def code_error(self) -> float:
        """Decoding error of the code."""
        return self.code.error

    @property
    def extractor_distance(self) -> float:
        """Distance of the shared encoder's output from uniform."""
        return extractor_distance(self.extractor_view)

    def to_json(self) -> dict[str, Any]:
        """Report row."""
        return {
            "n": self.n,
            "a": self.a,
            "b": self.b,
            "gamma_n": self.gamma_n,
            "logM_nats": self.extractor_view.log_size,
            "epsilon_n": self.epsilon_n,
            "code_error": self.code_error,
            "extractor_distance": self.extractor_distance,
        }


def build_joint_pair(table: TypeClassTable, a: float, b: float) -> JointPair:
    """Pair whose errors approach (1 - eps, eps) at the eps-quantile (a, b)."""
    n = table.n
    root_n = math.sqrt(n)
    gamma_n = n ** -0.25
    elem = table.per_element_log_prob
    inside = elem > -(n * a + root_n * b)
    order = table.order.tolist()
    injective = [c for c in order if inside[c]]
    outside = [c for c in order if not inside[c] and elem[c] > LOG_ZERO]
    epsilon_n = table.mass_where(inside)
    if outside:
        log_rest = log_sum(table.class_log_prob[outside].tolist())
        spread_size = max(1, floor_exp(log_rest + n * a + root_n * (b + gamma_n)))
        spread = build_virtual_extractor(table, spread_size, outside)
    else:
        spread_size = 0
        spread = VirtualExtractor(n, 0, ())
    composite = compose(table, injective, spread)
    injective_size = composite.size - spread_size
    code = ThresholdCode(
        table=table,
        log_size=composite.log_size,
        retained=tuple((c, table.counts[c]) for c in injective),
        error=ml_decoding_error(composite),
    )
    logger.debug(
        "joint pair n=%d: |S|=%s, spread bins=%s, eps_n=%.6g",
        n,
        injective_size,
        spread_size,
        epsilon_n,
    )
    return JointPair(
        table=table,
        a=a,
        b=b,
        gamma_n=gamma_n,
        code=code,
        extractor_view=composite,
        epsilon_n=epsilon_n,
        injective_size=injective_size,
        spread_size=spread_size,
    )


class TradeoffCheck(NamedTuple):
    """Outcome of checking code error + extractor distance >= delta(p_n)."""

    total: float
    delta: float
    holds: bool
    slack: float


def verify_tradeoff(
    pair: JointPair | tuple[float, float, bool],
    p: FiniteDistribution | TypeClassTable,
) -> TradeoffCheck:
    """Check the trade-off for a pair or a raw (code error, distance, shares encoder) triple.

    A triple is taken on trust: nothing verifies that its two numbers come
    from one encoder. Only an explicit False flag is refused. Pass a
    :class:`JointPair` to check a pair built here.
    """
    if isinstance(pair, JointPair):
        total = pair.code_error + pair.extractor_distance
    else:
        code_error, distance, shares_encoder = pair
        if not shares_encoder:
            raise HypothesisError("code and extractor must use the same encoder")
        total = code_error + distance
    delta, _ = delta_uniform_gap(p)
    return TradeoffCheck(total, delta, total >= delta - BOUND_SLACK, total - delta)


def tradeoff_row(pair: JointPair) -> dict[str, float]:
    """One CSV row of a trade-off sweep."""
    check = verify_tradeoff(pair, pair.table)
    return {
        "n": pair.n,
        "a": pair.a,
        "b": pair.b,
        "code_error": pair.code_error,
        "extractor_distance": pair.extractor_distance,
        "sum": check.total,
        "delta_pn": check.delta,
    }
