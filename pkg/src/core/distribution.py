"""Finite probability distributions over labeled alphabets."""

import json
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import numpy as np
from numpy.typing import NDArray

from .errors import InvalidDistributionError
from .logweight import LOG_ZERO

NORMALIZATION_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Probability mass function over a finite set of unique labels.

    ``log_probs`` caches natural logs; zero-probability symbols carry the
    ``LOG_ZERO`` sentinel.
    """

    labels: tuple[str, ...]
    probs: NDArray[np.float64]
    log_probs: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float).copy()
        if probs.ndim != 1 or probs.size == 0:
            raise InvalidDistributionError("probabilities must be a non-empty vector")
        if len(self.labels) != probs.size:
            raise InvalidDistributionError(
                f"{len(self.labels)} labels for {probs.size} probabilities"
            )
        if len(set(self.labels)) != len(self.labels):
            raise InvalidDistributionError("labels must be unique")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidDistributionError("probabilities must be finite and >= 0")
        total = math.fsum(probs.tolist())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidDistributionError(
                f"probabilities sum to {total!r}, not 1 within {NORMALIZATION_TOLERANCE}"
            )
        with np.errstate(divide="ignore"):
            logs = np.where(probs > 0, np.log(np.where(probs > 0, probs, 1.0)), LOG_ZERO)
        probs.setflags(write=False)
        logs.setflags(write=False)
        object.__setattr__(self, "labels", tuple(str(label) for label in self.labels))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "log_probs", logs)

    @classmethod
    def from_probs(
        cls, probs: Sequence[float], labels: Sequence[str] | None = None
    ) -> "FiniteDistribution":
        """Build from a probability list; labels default to "0", "1", ..."""
        if labels is None:
            labels = [str(i) for i in range(len(probs))]
        return cls(tuple(labels), np.asarray(probs, dtype=float))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, float]) -> "FiniteDistribution":
        """Build from a label -> probability mapping (insertion order kept)."""
        return cls(tuple(mapping), np.asarray(list(mapping.values()), dtype=float))

    @classmethod
    def uniform(cls, d: int) -> "FiniteDistribution":
        """Uniform distribution over d symbols."""
        if d < 1:
            raise InvalidDistributionError(f"alphabet size must be >= 1, got {d}")
        return cls.from_probs([1.0 / d] * d)

    @classmethod
    def bernoulli(cls, p: float) -> "FiniteDistribution":
        """Binary distribution with P("1") = p."""
        if not 0.0 <= p <= 1.0:
            raise InvalidDistributionError(f"Bernoulli parameter {p} not in [0, 1]")
        return cls.from_probs([1.0 - p, p])

    @classmethod
    def point_mass(cls, label: str, labels: Sequence[str]) -> "FiniteDistribution":
        """All mass on ``label`` within the alphabet ``labels``."""
        return cls.from_probs([1.0 if x == label else 0.0 for x in labels], labels)

    @property
    def size(self) -> int:
        """Alphabet size d."""
        return len(self.labels)

    @property
    def support_size(self) -> int:
        """Number of symbols with positive probability."""
        return int(np.count_nonzero(self.probs))

    def prob(self, label: str) -> float:
        """Probability of ``label`` (0 for labels outside the alphabet)."""
        try:
            return float(self.probs[self.labels.index(label)])
        except ValueError:
            return 0.0

    def aligned(
        self, other: "FiniteDistribution"
    ) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """Both probability vectors over the union of the two label sets."""
        union = list(self.labels) + [x for x in other.labels if x not in self.labels]
        return (
            np.array([self.prob(x) for x in union]),
            np.array([other.prob(x) for x in union]),
        )

    def to_json(self) -> list[list[Any]]:
        """JSON form: list of [label, prob] pairs."""
        return [[label, float(p)] for label, p in zip(self.labels, self.probs, strict=True)]

    def __repr__(self) -> str:
        body = ", ".join(
            f"{label}:{p:.6g}" for label, p in zip(self.labels, self.probs, strict=True)
        )
        return f"FiniteDistribution({body})"


def _parse_prob(token: str) -> Fraction:
    token = token.strip()
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as e:
        raise InvalidDistributionError(f"cannot parse probability {token!r}") from e


def _from_fractions(labels: list[str], values: list[Fraction]) -> FiniteDistribution:
    if any(v < 0 for v in values):
        raise InvalidDistributionError("probabilities must be >= 0")
    total = sum(values, Fraction(0))
    if abs(total - 1) > Fraction(NORMALIZATION_TOLERANCE):
        raise InvalidDistributionError(f"probabilities sum to {float(total)!r}, not 1")
    # exact fractions round to the nearest double
    return FiniteDistribution(tuple(labels), np.array([float(v) for v in values]))


def parse_distribution(text: str) -> FiniteDistribution:
    """Parse ``label:prob,label:prob,...``, ``p1,p2,...`` or a JSON array.

    Probabilities may be decimals or exact fractions ``num/den``. JSON input is
    either a list of numbers or a list of ``[label, prob]`` pairs.
    """
    text = text.strip()
    if not text:
        raise InvalidDistributionError("empty distribution text")
    if text.startswith("["):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidDistributionError(f"invalid JSON: {e.msg}") from e
        if not isinstance(data, list) or not data:
            raise InvalidDistributionError("JSON distribution must be a non-empty list")
        if all(isinstance(x, list) and len(x) == 2 for x in data):
            labels = [str(x[0]) for x in data]
            values = [_parse_prob(str(x[1])) for x in data]
        else:
            labels = [str(i) for i in range(len(data))]
            values = [_parse_prob(str(x)) for x in data]
        return _from_fractions(labels, values)

    labels = []
    values = []
    for i, item in enumerate(text.split(",")):
        if ":" in item:
            label, _, prob = item.partition(":")
            labels.append(label.strip())
        else:
            prob = item
            labels.append(str(i))
        values.append(_parse_prob(prob))
    return _from_fractions(labels, values)
