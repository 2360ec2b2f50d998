"""Tests for rates under divergence criteria."""

import math

import numpy as np
import pytest

from src.core.distribution import FiniteDistribution
from src.core.errors import DomainError
from src.core.measures import entropy
from src.randomness.kl_rates import (
    GRID_POINTS,
    S_MAX,
    S_MIN,
    GaussianLimit,
    build_kl_optimal_code,
    gaussian_partial_moment,
    kl_rate_lower_bound,
    point_mass_limit,
    s_grid,
    s_star_family,
    s_star_second_order,
)
from src.sources.markov import parse_markov
from src.sources.types import iid_type_table
from src.spectrum.cdf import spectrum_cdf

BERNOULLI = FiniteDistribution.bernoulli(0.11)
H = 0.346515
PHI_AT_ZERO = 1.0 / math.sqrt(2.0 * math.pi)
# log M * 2 / sqrt(M) >= log 2 for 5 <= M <= SPREAD_CAP
SPREAD_CAP = 200


def test_first_order_lower_bound() -> None:
    """Test the partial moment of a point-mass limit."""
    limit = point_mass_limit(H)
    assert kl_rate_lower_bound(limit, H + 0.1) == pytest.approx(0.1)
    assert kl_rate_lower_bound(limit, H) == 0.0
    assert kl_rate_lower_bound(limit, H - 0.1) == 0.0


def test_second_order_lower_bound() -> None:
    """Test E[(b - X)+] for a normal limit."""
    assert kl_rate_lower_bound(GaussianLimit(1.0), 0.0, "second") == pytest.approx(0.398942, abs=1e-6)
    assert kl_rate_lower_bound(GaussianLimit(1.0), -10.0, "second") <= 1e-20
    assert gaussian_partial_moment(1.0, 5.0) == pytest.approx(5.0, abs=1e-6)
    assert gaussian_partial_moment(0.0, 0.3) == 0.3
    assert gaussian_partial_moment(0.0, -0.3) == 0.0

    with pytest.raises(DomainError):
        kl_rate_lower_bound(GaussianLimit(1.0), 0.0, "first")
    with pytest.raises(DomainError):
        kl_rate_lower_bound(point_mass_limit(H), 0.0, "third")


def test_lower_bound_on_finite_spectrum() -> None:
    """Test the first-order integral over an exact spectrum."""
    f = spectrum_cdf(iid_type_table(BERNOULLI, 2))
    a = 1.5
    expected = sum(m * (a - x) for x, m in zip(f.values, f.masses, strict=True) if x <= a)
    assert kl_rate_lower_bound(f, a) == pytest.approx(expected, abs=1e-12)


def test_s_star_family_uniform() -> None:
    """Test the s -> 0 limit wins for a uniform source."""
    family = s_star_family(FiniteDistribution.uniform(4), 0.2)
    assert family.s_star_2 == pytest.approx(math.log(4), abs=1e-12)
    assert family.minimizer == 0.0
    assert family.s_star == pytest.approx(math.log(4) + 0.2)


def test_s_star_family_bernoulli() -> None:
    """Test S*, S*_1 and S*_2 for Bernoulli(0.11) at delta=0.1."""
    family = s_star_family(BERNOULLI, 0.1)
    assert family.s_star == pytest.approx(0.446515, abs=1e-6)
    assert family.s_star_1 == pytest.approx(0.346515, abs=1e-6)
    assert family.s_star_2 == pytest.approx(0.5852, abs=1e-3)
    assert family.minimizer == pytest.approx(0.47, abs=0.05)

    # dense scan of the same objective
    s = np.linspace(1e-6, 1 - 1e-6, 1_000_000)
    psi = np.logaddexp(s * math.log(0.89), s * math.log(0.11))
    scanned = float(np.min((s * 0.1 + psi) / (1.0 - s)))
    assert family.s_star_2 <= scanned + 1e-9
    assert family.s_star_2 == pytest.approx(scanned, abs=1e-6)

    with pytest.raises(DomainError):
        s_star_family(BERNOULLI, 0.0)


def test_s_star_family_of_iid_chain() -> None:
    """Test a chain with identical columns reproduces the i.i.d. values."""
    chain = parse_markov("0.89,0.89;0.11,0.11")
    family = s_star_family(chain, 0.1)
    reference = s_star_family(BERNOULLI, 0.1)
    assert family.s_star_1 == pytest.approx(reference.s_star_1, abs=1e-9)
    assert family.s_star_2 == pytest.approx(reference.s_star_2, abs=1e-6)


def test_second_order_s_star() -> None:
    """Test the Gaussian second-order rates."""
    b, _ = s_star_second_order(1.0, PHI_AT_ZERO)
    assert b == pytest.approx(0.0, abs=1e-8)

    _, b1 = s_star_second_order(2.5, math.log(2))
    assert b1 == pytest.approx(0.0, abs=1e-12)

    tiny, _ = s_star_second_order(1.0, 1e-6)
    assert tiny < -3.0

    with pytest.raises(DomainError):
        s_star_second_order(0.0, 0.1)
    with pytest.raises(DomainError):
        s_star_second_order(1.0, -0.1)


def test_kl_code_degenerate_cases() -> None:
    """Test an empty injective part and a single injective class."""
    table = iid_type_table(BERNOULLI, 2)

    pure = build_kl_optimal_code(table, 0.01)
    assert pure.epsilon_n == 0.0
    assert pure.code.retained == ()

    one = build_kl_optimal_code(table, 1.0)
    assert one.epsilon_n == pytest.approx(0.7921, abs=1e-12)
    assert [table.describe_class(c) for c, _ in one.code.retained] == [[2, 0]]
    assert one.code.error == pytest.approx(0.2079, abs=1e-12)

    report = one.to_json()
    assert report["n"] == 2
    assert report["epsilon_n"] == pytest.approx(0.7921, abs=1e-12)


def test_kl_code_rate_sweep() -> None:
    """Test the per-symbol divergence approaches delta at a = H + delta."""
    delta = 0.05
    h = entropy(BERNOULLI)
    values = []
    for n in (100, 1000, 10_000):
        code = build_kl_optimal_code(iid_type_table(BERNOULLI, n), h + delta)
        values.append(code.kl_per_n)
        assert 0.0 <= code.decoding_error <= 1.0
    assert values[-1] == pytest.approx(delta, abs=0.02)


def test_spread_part_meets_divergence_bound() -> None:
    """Test the spread part of every constructed code with at most SPREAD_CAP bins."""
    rng = np.random.default_rng(37)
    sources = [BERNOULLI, FiniteDistribution.from_probs([0.5, 0.3, 0.2])]
    sources += [FiniteDistribution.from_probs(rng.dirichlet(np.ones(3)).tolist()) for _ in range(3)]
    checked = 0
    for p in sources:
        h = entropy(p)
        for n in range(1, 31):
            table = iid_type_table(p, n)
            for delta in (0.02, 0.05, 0.1, 0.2):
                code = build_kl_optimal_code(table, h + delta)
                if code.spread_check is None or code.spread_size > SPREAD_CAP:
                    continue
                checked += 1
                assert code.spread_check.holds
    assert checked >= 50


def test_s_grid_covers_the_open_interval() -> None:
    """Test the scan grid size, order and endpoints."""
    grid = s_grid()
    assert grid.size == GRID_POINTS == 256
    assert np.all(np.diff(grid) > 0)
    assert grid[0] == S_MIN
    assert grid[-1] == pytest.approx(S_MAX, abs=1e-15)
    assert 0.5 in grid.tolist()
