"""Entropy-type functionals and divergences of finite distributions.

Every quantity is in nats. ``0 log 0`` is taken as 0 throughout.
"""

import math
from typing import TYPE_CHECKING

import numpy as np
from scipy.special import entr, logsumexp, rel_entr

from .distribution import FiniteDistribution
from .errors import DomainError

if TYPE_CHECKING:
    from ..sources.types import TypeClassTable


def entropy(p: FiniteDistribution) -> float:
    """Shannon entropy H(P) = -sum P log P."""
    return math.fsum(entr(p.probs).tolist())


def binary_entropy(q: float) -> float:
    """Entropy of Bernoulli(q) in nats."""
    return float(entr(q) + entr(1.0 - q))


def varentropy(p: FiniteDistribution) -> float:
    """Variance of -log P(X) under P."""
    support = p.probs > 0
    h = entropy(p)
    dev = -p.log_probs[support] - h
    return math.fsum((p.probs[support] * dev * dev).tolist())


def renyi_psi(p: FiniteDistribution, s: float) -> float:
    """psi(s) = log sum_w P(w)^s, evaluated in the log domain."""
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if s == 1.0:
        return 0.0
    support = p.probs > 0
    return float(logsumexp(s * p.log_probs[support]))


def variational_distance(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """Half the L1 distance; labels missing from one side count as 0."""
    a, b = p.aligned(q)
    return min(1.0, 0.5 * math.fsum(np.abs(a - b).tolist()))


def kl_divergence(p: FiniteDistribution, q: FiniteDistribution) -> float:
    """D(p||q); +inf when p charges a label outside the support of q."""
    a, b = p.aligned(q)
    terms = rel_entr(a, b)
    if np.any(np.isinf(terms)):
        return math.inf
    return max(0.0, math.fsum(terms.tolist()))


def truncated_entropy(
    table: "TypeClassTable | FiniteDistribution", log_m: float
) -> float:
    """H(M, p) = -sum over p(w) > 1/M of p(w) log p(w).

    The threshold is strict: outcomes with p(w) exactly 1/M are excluded.
    Accepts a type-class table (outcome groups of equal probability) or a
    plain distribution.
    """
    if isinstance(table, FiniteDistribution):
        elem = table.log_probs
        mass = table.log_probs
    else:
        elem = table.per_element_log_prob
        mass = table.class_log_prob
    keep = elem > -log_m
    return math.fsum((np.exp(mass[keep]) * -elem[keep]).tolist())
