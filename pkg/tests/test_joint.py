"""Tests for the joint code/extractor trade-off."""

import itertools
import math

import numpy as np
import pytest

from src.core.distribution import FiniteDistribution
from src.core.errors import HypothesisError
from src.core.measures import entropy
from src.sources.types import iid_type_table
from src.tradeoff.joint import (
    CSV_HEADER,
    build_joint_pair,
    delta_uniform_gap,
    tradeoff_row,
    verify_tradeoff,
)

BERNOULLI = FiniteDistribution.bernoulli(0.11)


def _brute_force_delta(probs: list[float]) -> float:
    best = math.inf
    for m in range(1, len(probs) + 1):
        for subset in itertools.combinations(range(len(probs)), m):
            chosen = set(subset)
            d = 0.5 * sum(abs(q - 1 / m) if i in chosen else q for i, q in enumerate(probs))
            best = min(best, d)
    return best


def _random_encoder(probs: np.ndarray, size: int, rng: np.random.Generator) -> tuple[float, float]:
    """ML decoding error and distance from uniform of a random map into ``size`` bins."""
    bins = rng.integers(0, size, len(probs))
    loads = np.zeros(size)
    best = np.zeros(size)
    for b, q in zip(bins.tolist(), probs.tolist(), strict=True):
        loads[b] += q
        best[b] = max(best[b], q)
    return 1.0 - float(best.sum()), 0.5 * float(np.abs(loads - 1.0 / size).sum())


def test_delta_examples() -> None:
    """Test delta on uniform, skewed and Bernoulli sources."""
    assert delta_uniform_gap(FiniteDistribution.uniform(4))[0] == pytest.approx(0.0, abs=1e-15)

    value, m = delta_uniform_gap(FiniteDistribution.from_probs([0.5, 0.25, 0.25]))
    assert value == pytest.approx(1 / 6)
    assert m == 3

    value, m = delta_uniform_gap(BERNOULLI)
    assert value == pytest.approx(0.11)
    assert m == 1


def test_delta_matches_subset_search() -> None:
    """Test against every subset on small random distributions."""
    rng = np.random.default_rng(13)
    for _ in range(60):
        d = int(rng.integers(2, 8))
        probs = rng.dirichlet(np.ones(d) * float(rng.uniform(0.2, 3.0)))
        value, _ = delta_uniform_gap(FiniteDistribution.from_probs(probs.tolist()))
        assert value == pytest.approx(_brute_force_delta(probs.tolist()), abs=1e-12)


def test_delta_on_type_tables() -> None:
    """Test the class-level scan agrees with the expanded outcomes."""
    p = FiniteDistribution.from_probs([0.6, 0.3, 0.1])
    n = 3
    expanded = [math.prod(t) for t in itertools.product(p.probs.tolist(), repeat=n)]
    assert delta_uniform_gap(iid_type_table(p, n))[0] == pytest.approx(
        _brute_force_delta(expanded), abs=1e-12
    )


def test_tradeoff_on_random_encoders() -> None:
    """Test code error + distance >= delta for arbitrary shared encoders on p^n."""
    rng = np.random.default_rng(17)
    for _ in range(1000):
        d = int(rng.integers(2, 5))
        n = int(rng.integers(1, 5))
        single = rng.dirichlet(np.ones(d)).tolist()
        expanded = [math.prod(t) for t in itertools.product(single, repeat=n)]
        p = FiniteDistribution.from_probs(expanded)
        size = int(rng.integers(1, min(len(expanded), 16) + 1))
        error, distance = _random_encoder(p.probs, size, rng)
        assert verify_tradeoff((error, distance, True), p).holds


def test_separate_encoders_rejected() -> None:
    """Test the check refuses pairs built from different encoders."""
    with pytest.raises(HypothesisError):
        verify_tradeoff((0.0, 0.0, False), BERNOULLI)


def test_small_joint_pair_holds() -> None:
    """Test a constructed pair at n=16."""
    table = iid_type_table(BERNOULLI, 16)
    pair = build_joint_pair(table, entropy(BERNOULLI), 0.0)
    check = verify_tradeoff(pair, table)
    assert check.holds
    assert 0.0 <= pair.code_error <= 1.0
    assert 0.0 <= pair.extractor_distance <= 1.0
    assert pair.gamma_n == pytest.approx(0.5)
    assert tuple(tradeoff_row(pair)) == CSV_HEADER


def test_joint_pair_splits_errors_at_the_median() -> None:
    """Test both terms approach 1/2 at (H, 0) and the sum approaches 1."""
    n = 10_000
    table = iid_type_table(BERNOULLI, n)
    pair = build_joint_pair(table, entropy(BERNOULLI), 0.0)
    assert pair.code_error == pytest.approx(0.5, abs=0.07)
    assert pair.extractor_distance == pytest.approx(0.5, abs=0.07)
    total = pair.code_error + pair.extractor_distance
    assert 0.93 <= total <= 1.0 + 1e-9
    assert verify_tradeoff(pair, table).holds


def test_delta_grows_with_block_length() -> None:
    """Test delta(p_n) increases toward 1."""
    values = [delta_uniform_gap(iid_type_table(BERNOULLI, n))[0] for n in (1, 10, 100, 1000)]
    assert all(x <= y + 1e-12 for x, y in zip(values, values[1:], strict=False))
    assert values[-1] > 0.9


def test_constructed_pairs_hold_on_random_sources() -> None:
    """Test the trade-off for constructed pairs over random (p, n, a, b)."""
    rng = np.random.default_rng(23)
    for _ in range(1000):
        d = int(rng.integers(2, 7))
        p = FiniteDistribution.from_probs(rng.dirichlet(np.ones(d)).tolist())
        table = iid_type_table(p, int(rng.integers(1, 9)))
        a = float(rng.uniform(0.0, math.log(d)))
        pair = build_joint_pair(table, a, float(rng.uniform(-1.0, 1.0)))
        assert verify_tradeoff(pair, table).holds


def test_triples_are_compared_as_given() -> None:
    """Test a triple claiming a shared encoder is only compared with delta."""
    check = verify_tradeoff((0.0, 0.0, True), BERNOULLI)
    assert not check.holds
    assert check.delta == pytest.approx(0.11)
    assert verify_tradeoff((0.05, 0.06, True), BERNOULLI).holds
