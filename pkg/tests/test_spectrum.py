"""Tests for the information spectrum and the Gaussian approximation."""

import math

import numpy as np
import pytest

from src.core.distribution import FiniteDistribution
from src.core.errors import DomainError
from src.core.measures import varentropy
from src.sources.explicit import ExplicitSource
from src.sources.types import iid_type_table
from src.spectrum.cdf import (
    SpectrumCDF,
    cdf_at,
    lower_partial_moment,
    quantile_rate,
    second_order_quantile,
    sigma_exponent,
    spectrum_cdf,
    s_star_2_from_spectrum,
    s_star_from_spectrum,
    spectrum_from_distribution,
)
from src.spectrum.normal import (
    gaussian_second_order,
    std_normal_cdf,
    std_normal_pdf,
    std_normal_quantile,
)

BERNOULLI = FiniteDistribution.bernoulli(0.11)
H = 0.346515


def _b2() -> SpectrumCDF:
    return spectrum_cdf(iid_type_table(BERNOULLI, 2))


def test_spectrum_atoms() -> None:
    """Test atoms of Bernoulli(0.11)^2 and of a uniform source."""
    f = _b2()
    assert f.values.tolist() == pytest.approx([0.116534, 1.161904, 2.207275], abs=1e-6)
    assert f.masses.tolist() == pytest.approx([0.7921, 0.1958, 0.0121], abs=1e-12)
    assert f.cumulative[-1] == pytest.approx(1.0)

    flat = spectrum_cdf(iid_type_table(FiniteDistribution.uniform(2), 4))
    assert flat.num_atoms == 1
    assert flat.values[0] == pytest.approx(math.log(2))
    assert flat.masses[0] == pytest.approx(1.0)


def test_explicit_spectrum_merges_equal_values() -> None:
    """Test outcomes of equal probability merge into one atom."""
    p = FiniteDistribution.from_probs([0.25, 0.25, 0.5])
    f = spectrum_from_distribution(p, n=2)
    assert f.values.tolist() == pytest.approx([math.log(2) / 2, math.log(4) / 2])
    assert f.masses.tolist() == pytest.approx([0.5, 0.5])

    source = ExplicitSource({2: p})
    assert spectrum_cdf(source.table(2)).values.tolist() == pytest.approx(f.values.tolist())


def test_atoms_must_increase() -> None:
    """Test malformed spectra are rejected."""
    with pytest.raises(DomainError):
        SpectrumCDF(1, np.array([1.0, 1.0]), np.log([0.5, 0.5]))
    with pytest.raises(DomainError):
        SpectrumCDF(1, np.array([1.0, 2.0]), np.log([0.5, 0.25]))


def test_quantiles() -> None:
    """Test inf-style quantiles and the strict variant at a cumulative value."""
    f = _b2()
    assert quantile_rate(f, 0.5) == pytest.approx(0.116534, abs=1e-6)
    assert quantile_rate(f, 0.9) == pytest.approx(1.161904, abs=1e-6)
    assert quantile_rate(f, 1.0) == pytest.approx(2.207275, abs=1e-6)

    flat = spectrum_cdf(iid_type_table(FiniteDistribution.uniform(2), 4))
    for eps in (0.01, 0.5, 0.99):
        assert quantile_rate(flat, eps) == pytest.approx(0.693147, abs=1e-6)

    at_first = float(f.cumulative[0])
    assert quantile_rate(f, at_first) == pytest.approx(f.values[0])
    assert quantile_rate(f, at_first, inclusive=False) == pytest.approx(f.values[1])

    with pytest.raises(DomainError):
        quantile_rate(f, 0.0)


def test_cdf_at_boundaries() -> None:
    """Test inclusive and strict CDF values at an atom."""
    f = _b2()
    x = float(f.values[1])
    assert cdf_at(f, x) == pytest.approx(0.9879)
    assert cdf_at(f, x, inclusive=False) == pytest.approx(0.7921)
    assert cdf_at(f, 0.0) == 0.0


def test_second_order_quantile() -> None:
    """Test sqrt(n) times the quantile offset."""
    f = _b2()
    assert second_order_quantile(f, 0.5, H) == pytest.approx(-0.325242, abs=1e-5)
    assert second_order_quantile(f, 0.5, quantile_rate(f, 0.5)) == 0.0

    flat = spectrum_cdf(iid_type_table(FiniteDistribution.uniform(2), 4))
    assert second_order_quantile(flat, 0.3, math.log(2)) == pytest.approx(0.0, abs=1e-12)


def test_sigma_exponent() -> None:
    """Test the tail exponent at, inside and past the atoms."""
    f = _b2()
    assert sigma_exponent(f, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert sigma_exponent(f, 1.0) == pytest.approx(0.785340, abs=1e-6)
    assert sigma_exponent(f, 3.0) == math.inf


def test_lower_partial_moment() -> None:
    """Test the integral of (a - x) below a."""
    f = _b2()
    assert lower_partial_moment(f, 0.0) == 0.0
    expected = 0.7921 * (1.0 - float(f.values[0]))
    assert lower_partial_moment(f, 1.0) == pytest.approx(expected, abs=1e-12)


def test_normal_cdf_values() -> None:
    """Test Phi at standard points."""
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(1.959964) == pytest.approx(0.975, abs=1e-6)
    assert std_normal_cdf(-1.281552) == pytest.approx(0.1, abs=1e-6)


def test_normal_quantile() -> None:
    """Test the inverse CDF in the center and in both tails."""
    assert std_normal_quantile(0.5) == pytest.approx(0.0, abs=1e-15)
    assert std_normal_quantile(0.9) == pytest.approx(1.281552, abs=1e-6)
    assert std_normal_quantile(0.975) == pytest.approx(1.959964, abs=1e-6)
    for eps in (1e-12, 1e-4, 0.01, 0.3, 0.7, 0.99, 1 - 1e-9):
        assert std_normal_cdf(std_normal_quantile(eps)) == pytest.approx(eps, rel=1e-9)
    for eps in (0.0, 1.0, -0.5):
        with pytest.raises(DomainError):
            std_normal_quantile(eps)


def test_gaussian_second_order() -> None:
    """Test sqrt(V) times the normal quantile."""
    assert gaussian_second_order(0.7, 0.5) == pytest.approx(0.0, abs=1e-15)
    assert gaussian_second_order(0.427940, 0.9) == pytest.approx(0.838369, abs=1e-5)
    assert gaussian_second_order(1.0, 0.975) == pytest.approx(1.959964, abs=1e-6)
    assert gaussian_second_order(0.0, 0.1) == 0.0


def test_normal_pdf() -> None:
    """Test phi at 0 and its symmetry."""
    assert std_normal_pdf(0.0) == pytest.approx(0.398942, abs=1e-6)
    assert std_normal_pdf(1.3) == std_normal_pdf(-1.3)


def test_s_star_from_spectrum() -> None:
    """Test the finite-n divergence rates read off a spectrum."""
    flat = spectrum_cdf(iid_type_table(FiniteDistribution.uniform(2), 4))
    assert s_star_from_spectrum(flat, 0.1) == pytest.approx(math.log(2) + 0.1)
    assert s_star_2_from_spectrum(flat, 0.1) == pytest.approx(math.log(2))

    f = _b2()
    assert s_star_from_spectrum(f, 0.1) == pytest.approx(float(f.values[0]) + 0.1 / 0.7921, abs=1e-9)
    assert s_star_2_from_spectrum(f, 0.5) == pytest.approx(float(f.values[0]), abs=1e-9)
    assert s_star_2_from_spectrum(f, 1.0) == pytest.approx(float(f.values[1]) - 0.785340, abs=1e-6)

    with pytest.raises(DomainError):
        s_star_from_spectrum(f, 0.0)


def test_equal_probability_classes_form_one_atom() -> None:
    """Test classes whose logs differ by rounding still merge, up to n=12."""
    for k in (2, 3, 4):
        for n in range(1, 13):
            f = spectrum_cdf(iid_type_table(FiniteDistribution.uniform(k), n))
            assert f.num_atoms == 1
            assert f.values[0] == pytest.approx(math.log(k), abs=1e-12)

    p = FiniteDistribution.from_probs([0.25, 0.25, 0.5])
    for n in range(1, 13):
        f = spectrum_cdf(iid_type_table(p, n))
        assert f.num_atoms == n + 1
        assert f.cumulative[-1] == pytest.approx(1.0, abs=1e-12)


def test_spectrum_of_four_letter_source() -> None:
    """Test a source whose distinct compositions collide in probability."""
    p = FiniteDistribution.from_probs([0.4, 0.3, 0.2, 0.1])
    for n in (5, 10):
        f = spectrum_cdf(iid_type_table(p, n))
        assert f.cumulative[-1] == pytest.approx(1.0, abs=1e-9)
        assert np.all(np.diff(f.values) > 1e-10)


def test_cdf_and_quantile_agree_on_a_dense_grid() -> None:
    """Test quantile_rate is the generalized inverse of cdf_at."""
    sources = [BERNOULLI, FiniteDistribution.from_probs([0.6, 0.3, 0.1])]
    for p, n in zip(sources, (60, 20), strict=True):
        f = spectrum_cdf(iid_type_table(p, n))
        for eps in np.linspace(0.001, 0.999, 999).tolist():
            q = quantile_rate(f, eps)
            assert cdf_at(f, q) >= eps
            assert cdf_at(f, q, inclusive=False) < eps
        for i in np.flatnonzero(f.masses > 1e-12).tolist():
            assert quantile_rate(f, float(f.cumulative[i])) == f.values[i]


def test_sigma_exponent_is_monotone() -> None:
    """Test the tail exponent never decreases in a."""
    f = spectrum_cdf(iid_type_table(BERNOULLI, 200))
    grid = np.linspace(0.0, float(f.values[-1]), 400).tolist()
    exponents = [sigma_exponent(f, a) for a in grid]
    assert all(x <= y + 1e-12 for x, y in zip(exponents, exponents[1:], strict=False))
    assert exponents[0] == pytest.approx(0.0, abs=1e-12)


def test_quantiles_approach_gaussian_prediction() -> None:
    """Test sqrt(n)-scaled quantiles at n=10^4 against sqrt(V) Phi^-1."""
    f = spectrum_cdf(iid_type_table(BERNOULLI, 10_000))
    v = varentropy(BERNOULLI)
    for eps in (0.1, 0.25, 0.5, 0.75, 0.9):
        exact = second_order_quantile(f, 1.0 - eps, H)
        assert exact == pytest.approx(gaussian_second_order(v, 1.0 - eps), abs=0.05)
