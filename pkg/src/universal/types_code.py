"""Universal fixed-length code and extractor built from type classes alone.

The included types are T_n(a, b) = {types with log|T| <= na + b sqrt(n)}; the
choice never looks at the source. For a source P the code's error tends to 0
when H(P) < a, and the extractor's distance bound tends to 0 when H(P) > a.
"""

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from numpy.typing import NDArray

from ..core.distribution import FiniteDistribution
from ..core.errors import DomainError
from ..core.logweight import LOG_ZERO, log_sum
from ..sources.types import (
    MAX_COMPOSITIONS,
    enumerate_compositions,
    iid_type_table,
    log_multinomial,
)

INCLUSION_SLACK = 1e-12


@dataclass(frozen=True, eq=False)
class UniversalTypeCode:
    """Types admitted by the size threshold, in lexicographic order."""

    n: int
    d: int
    a: float
    b: float
    included: NDArray[np.bool_] = field(repr=False)
    log_type_sizes: NDArray[np.float64] = field(repr=False)

    @property
    def log_threshold(self) -> float:
        """na + b sqrt(n)."""
        return self.n * self.a + self.b * math.sqrt(self.n)

    @property
    def included_types(self) -> list[list[int]]:
        """Compositions of the included types."""
        comps = enumerate_compositions(self.n, self.d, MAX_COMPOSITIONS)
        return comps[self.included].tolist()

    @property
    def log_total_size(self) -> float:
        """log of the number of strings in included types."""
        return log_sum(self.log_type_sizes[self.included].tolist())

    @property
    def second_order_b(self) -> float:
        """(log size - na) / sqrt(n)."""
        return (self.log_total_size - self.n * self.a) / math.sqrt(self.n)

    def counting_bound(self) -> float:
        """d log(n + 1) + na + b sqrt(n)."""
        return self.d * math.log(self.n + 1) + self.log_threshold

    def to_json(self, sources: list[tuple[str, FiniteDistribution]] | None = None) -> dict[str, Any]:
        """Report with the code error under each named source."""
        return {
            "n": self.n,
            "d": self.d,
            "a_nats": self.a,
            "b": self.b,
            "log_size_nats": self.log_total_size,
            "second_order_b": self.second_order_b,
            "errors": [
                {"P": name, "error": universal_code_error(self, p)}
                for name, p in (sources or [])
            ],
        }


def universal_type_code(
    n: int, d: int, a: float, b: float, max_compositions: int = MAX_COMPOSITIONS
) -> UniversalTypeCode:
    """Admit every type class of size at most e^{na + b sqrt(n)}."""
    if d < 2:
        raise DomainError(f"alphabet size must be >= 2, got {d}")
    comps = enumerate_compositions(n, d, max_compositions)
    log_sizes = log_multinomial(comps)
    threshold = n * a + b * math.sqrt(n)
    return UniversalTypeCode(
        n=n,
        d=d,
        a=a,
        b=b,
        included=log_sizes <= threshold + INCLUSION_SLACK,
        log_type_sizes=log_sizes,
    )


def _check_alphabet(ucode: UniversalTypeCode, p: FiniteDistribution) -> None:
    if p.size != ucode.d:
        raise DomainError(f"source has {p.size} symbols, code was built for {ucode.d}")


def universal_code_error(ucode: UniversalTypeCode, p: FiniteDistribution) -> float:
    """1 - P^n(T_n(a, b))."""
    _check_alphabet(ucode, p)
    table = iid_type_table(p, ucode.n)
    return min(1.0, table.mass_where(~ucode.included))


@dataclass(frozen=True)
class UniversalExtractorBound:
    """Upper bounds on the distance of the universal extractor.

    ``bound`` is P^n(T^c)/n + P^n(T); ``refined`` replaces the first term by
    the per-type sum it is derived from.
    """

    bound: float
    refined: float
    inside_mass: float
    log_size: float


def universal_extractor_distance(
    n: int, d: int, a: float, b: float, p: FiniteDistribution
) -> UniversalExtractorBound:
    """Bound for spreading each excluded type over e^{na + b sqrt(n)}/n bins.

    Included types all map to one bin, so their mass counts in full.
    """
    ucode = universal_type_code(n, d, a, b)
    _check_alphabet(ucode, p)
    table = iid_type_table(p, n)
    inside = table.mass_where(ucode.included)
    outside = ~ucode.included
    log_size = ucode.log_threshold - math.log(n)
    # per excluded type: P^n(T') * min(1, M / |T'|)
    per_type = table.class_log_prob[outside] + np.minimum(
        0.0, log_size - ucode.log_type_sizes[outside]
    )
    per_type = per_type[per_type > LOG_ZERO]
    refined_outside = math.exp(log_sum(per_type.tolist())) if per_type.size else 0.0
    outside_mass = table.mass_where(outside)
    return UniversalExtractorBound(
        bound=min(1.0, outside_mass / n + inside),
        refined=min(1.0, refined_outside + inside),
        inside_mass=inside,
        log_size=log_size,
    )
