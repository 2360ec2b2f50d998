"""Explicit sources: a distribution p_n given directly for each block length."""

import json
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path

from ..core.distribution import FiniteDistribution
from ..core.errors import InvalidDistributionError
from .types import TypeClassTable, outcome_table


@dataclass(frozen=True)
class ExplicitSource:
    """A general source {p_n} known at finitely many block lengths."""

    per_n: Mapping[int, FiniteDistribution]

    def __post_init__(self) -> None:
        if not self.per_n:
            raise InvalidDistributionError("explicit source needs at least one block length")
        for n in self.per_n:
            if n < 1:
                raise InvalidDistributionError(f"block length must be >= 1, got {n}")

    @property
    def block_lengths(self) -> list[int]:
        """Available n in increasing order."""
        return sorted(self.per_n)

    def table(self, n: int) -> TypeClassTable:
        """Singleton-class table of p_n."""
        try:
            return outcome_table(self.per_n[n], n)
        except KeyError:
            raise InvalidDistributionError(
                f"no distribution given for n={n}; have {self.block_lengths}"
            ) from None

    @classmethod
    def from_json(cls, path: str | Path) -> "ExplicitSource":
        """Load ``{"n": {"label": prob, ...}, ...}`` from a JSON file."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(data, dict):
            raise InvalidDistributionError("explicit source JSON must be an object")
        return cls(
            {int(n): FiniteDistribution.from_mapping(dist) for n, dist in data.items()}
        )
