"""Tests for distributions, entropy functionals and log-domain helpers."""

import itertools
import math

import numpy as np
import pytest

from src.core.distribution import FiniteDistribution, parse_distribution
from src.core.errors import DomainError, InvalidDistributionError
from src.core.logweight import (
    LOG_ZERO,
    LogWeight,
    ceil_exp,
    floor_exp,
    log_diff_abs,
    log_int,
    log_sum,
)
from src.core.measures import (
    binary_entropy,
    entropy,
    kl_divergence,
    renyi_psi,
    truncated_entropy,
    variational_distance,
    varentropy,
)
from src.sources.types import iid_type_table

BERNOULLI = FiniteDistribution.bernoulli(0.11)
SKEWED = FiniteDistribution.from_probs([0.5, 0.25, 0.25])


def test_distribution_validation() -> None:
    """Test that malformed probability vectors are rejected."""
    with pytest.raises(InvalidDistributionError):
        FiniteDistribution.from_probs([0.5, 0.4])
    with pytest.raises(InvalidDistributionError):
        FiniteDistribution.from_probs([1.5, -0.5])
    with pytest.raises(InvalidDistributionError):
        FiniteDistribution.from_probs([0.5, 0.5], ["a", "a"])


def test_parse_distribution_forms() -> None:
    """Test labeled, positional, fractional and JSON distribution text."""
    p = parse_distribution("heads:1/3, tails:2/3")
    assert p.labels == ("heads", "tails")
    assert p.prob("heads") == pytest.approx(1 / 3, abs=1e-15)

    q = parse_distribution("0.25,0.75")
    assert q.labels == ("0", "1")

    r = parse_distribution('[["x", 0.1], ["y", 0.9]]')
    assert r.prob("y") == pytest.approx(0.9)

    with pytest.raises(InvalidDistributionError):
        parse_distribution("a:0.5,b:0.6")
    with pytest.raises(InvalidDistributionError):
        parse_distribution("a:half,b:0.5")


def test_entropy_examples() -> None:
    """Test entropy on uniform, point-mass and Bernoulli sources."""
    assert entropy(FiniteDistribution.uniform(2)) == pytest.approx(0.693147, abs=1e-6)
    assert entropy(FiniteDistribution.point_mass("a", ["a", "b", "c"])) == 0.0
    assert entropy(BERNOULLI) == pytest.approx(0.346515, abs=1e-6)
    assert binary_entropy(0.11) == pytest.approx(entropy(BERNOULLI), abs=1e-15)


def test_varentropy_examples() -> None:
    """Test varentropy vanishes on uniform sources and matches Bernoulli(0.11)."""
    assert varentropy(FiniteDistribution.uniform(7)) == pytest.approx(0.0, abs=1e-15)
    assert varentropy(FiniteDistribution.bernoulli(0.5)) == pytest.approx(0.0, abs=1e-15)
    assert varentropy(BERNOULLI) == pytest.approx(0.427940, abs=1e-6)


def test_renyi_psi() -> None:
    """Test psi(s) = log sum P^s and its domain."""
    assert renyi_psi(BERNOULLI, 1.0) == 0.0
    assert renyi_psi(FiniteDistribution.uniform(2), 0.5) == pytest.approx(0.346574, abs=1e-6)
    assert renyi_psi(BERNOULLI, 0.5) == pytest.approx(0.243062, abs=1e-6)
    for s in (0.0, -0.1, 1.5):
        with pytest.raises(DomainError):
            renyi_psi(BERNOULLI, s)


def test_distances() -> None:
    """Test variational distance and divergence examples."""
    a = FiniteDistribution.point_mass("a", ["a", "b"])
    b = FiniteDistribution.point_mass("b", ["a", "b"])
    assert variational_distance(SKEWED, SKEWED) == 0.0
    assert variational_distance(a, b) == 1.0
    assert variational_distance(SKEWED, FiniteDistribution.uniform(3)) == pytest.approx(1 / 6)

    assert kl_divergence(SKEWED, SKEWED) == 0.0
    skew = FiniteDistribution.from_probs([0.9, 0.1])
    assert kl_divergence(FiniteDistribution.uniform(2), skew) == pytest.approx(0.510826, abs=1e-6)
    assert kl_divergence(a, FiniteDistribution.uniform(2)) == pytest.approx(math.log(2))
    assert kl_divergence(FiniteDistribution.uniform(2), a) == math.inf


def test_truncated_entropy_threshold_is_strict() -> None:
    """Test truncated entropy excludes outcomes of probability exactly 1/M."""
    assert truncated_entropy(SKEWED, math.log(2)) == 0.0
    assert truncated_entropy(SKEWED, math.log(4)) == pytest.approx(0.346574, abs=1e-6)
    assert truncated_entropy(SKEWED, math.log(100)) == pytest.approx(1.039721, abs=1e-6)


def test_log_domain_helpers() -> None:
    """Test log sums and exact integer exponentials."""
    assert log_sum([]) == LOG_ZERO
    assert log_sum([LOG_ZERO, 0.0]) == 0.0
    assert log_sum([math.log(1e-300)] * 1000) == pytest.approx(math.log(1e-297), rel=1e-12)

    for k in (1, 2, 3, 1000, 2**40 + 1):
        assert floor_exp(log_int(k)) == k
        assert ceil_exp(log_int(k)) == k
    assert floor_exp(math.log(2.5)) == 2
    assert ceil_exp(math.log(2.5)) == 3
    # beyond double range the result is still an exact integer
    assert floor_exp(1000.0).bit_length() == 1443

    assert log_diff_abs(math.log(0.5), math.log(0.2)) == pytest.approx(math.log(0.3))
    assert log_diff_abs(math.log(0.2), math.log(0.5)) == pytest.approx(math.log(0.3))
    assert log_diff_abs(1.0, 1.0) == LOG_ZERO
    assert log_diff_abs(0.0, LOG_ZERO) == 0.0

    w = LogWeight.from_linear(0.25) + LogWeight.from_linear(0.5)
    assert w.linear() == pytest.approx(0.75)
    assert (LogWeight() * w).is_zero


def test_pinsker_inequality() -> None:
    """Test D(p||q) >= 2 d(p, q)^2 on random pairs."""
    rng = np.random.default_rng(5)
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        p = FiniteDistribution.from_probs(rng.dirichlet(np.ones(d)).tolist())
        q = FiniteDistribution.from_probs(rng.dirichlet(np.ones(d)).tolist())
        assert kl_divergence(p, q) >= 2.0 * variational_distance(p, q) ** 2 - 1e-12


def test_renyi_psi_is_convex() -> None:
    """Test midpoint convexity of psi on random sources."""
    rng = np.random.default_rng(6)
    grid = np.linspace(0.02, 1.0, 50)
    for _ in range(40):
        d = int(rng.integers(2, 7))
        p = FiniteDistribution.from_probs(rng.dirichlet(np.ones(d)).tolist())
        values = np.array([renyi_psi(p, float(s)) for s in grid])
        assert np.all(values[:-2] + values[2:] - 2.0 * values[1:-1] >= -1e-12)
        assert values[-1] == 0.0


def test_truncated_entropy_steps_at_thresholds() -> None:
    """Test H(M, p) is a non-decreasing step function of M jumping at 1/p(w)."""
    p = FiniteDistribution.from_probs([0.6, 0.3, 0.1])
    table = iid_type_table(p, 3)
    thresholds = np.unique(-table.per_element_log_prob)
    grid = np.linspace(0.0, float(thresholds[-1]) + 1.0, 500)
    values = [truncated_entropy(table, float(x)) for x in grid]
    assert all(x <= y for x, y in zip(values, values[1:], strict=False))
    assert values[-1] == pytest.approx(3 * entropy(p))

    for lo, hi in zip(thresholds[:-1], thresholds[1:], strict=True):
        inside = [truncated_entropy(table, float(x)) for x in np.linspace(lo, hi, 7)[1:-1]]
        assert len(set(inside)) == 1
        assert truncated_entropy(table, float(lo)) < inside[0]


def test_truncated_entropy_table_matches_enumeration() -> None:
    """Test the class-level sum against the expanded product distribution."""
    rng = np.random.default_rng(7)
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 6))
        p = FiniteDistribution.from_probs(rng.dirichlet(np.ones(d)).tolist())
        expanded = [math.prod(t) for t in itertools.product(p.probs.tolist(), repeat=n)]
        log_m = float(rng.uniform(0.0, n * math.log(d) + 1.0))
        assert truncated_entropy(iid_type_table(p, n), log_m) == pytest.approx(
            truncated_entropy(FiniteDistribution.from_probs(expanded), log_m), abs=1e-9
        )
