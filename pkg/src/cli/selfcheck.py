"""Small-scale oracle suite run by ``socint selfcheck``."""

import logging
import math
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from ..coding.threshold import build_threshold_code, min_log_size_for_error
from ..core.distribution import FiniteDistribution
from ..core.measures import (
    entropy,
    kl_divergence,
    renyi_psi,
    truncated_entropy,
    variational_distance,
    varentropy,
)
from ..randomness.criteria import (
    KLDirection,
    extractor_distance,
    extractor_kl,
    max_log_size_for_distance,
)
from ..randomness.extractor import LoadGroup, VirtualExtractor, build_extractor
from ..randomness.kl_rates import (
    GaussianLimit,
    kl_rate_lower_bound,
    s_star_family,
    s_star_second_order,
)
from ..sources.markov import (
    markov_entropy_rate,
    markov_stationary,
    markov_varentropy,
    parse_markov,
)
from ..sources.types import iid_type_table, outcome_table
from ..spectrum.cdf import SpectrumCDF, quantile_rate, second_order_quantile, sigma_exponent, spectrum_cdf
from ..spectrum.normal import gaussian_second_order, std_normal_cdf, std_normal_quantile
from ..tradeoff.joint import build_joint_pair, delta_uniform_gap, verify_tradeoff
from ..universal.types_code import universal_code_error, universal_type_code

logger = logging.getLogger(__name__)

BERNOULLI = FiniteDistribution.bernoulli(0.11)
SKEWED = FiniteDistribution.from_probs([0.5, 0.25, 0.25])
FOUR = FiniteDistribution.from_probs([0.4, 0.3, 0.2, 0.1])
H_BERNOULLI = 0.346515
SYMMETRIC_CHAIN = "0.8,0.2;0.2,0.8"


class Oracle(NamedTuple):
    """A named computation and the value it must reproduce."""

    name: str
    compute: Callable[[], float]
    expected: float
    tolerance: float


class OracleResult(NamedTuple):
    name: str
    value: float
    expected: float
    passed: bool


def _loads(values: list[float]) -> VirtualExtractor:
    with np.errstate(divide="ignore"):
        groups = tuple(LoadGroup(float(np.log(v)), 1, float(np.log(v))) for v in values)
    return VirtualExtractor(1, len(values), groups)


def _spectrum_b2() -> SpectrumCDF:
    return spectrum_cdf(iid_type_table(BERNOULLI, 2))


def _tradeoff_holds() -> float:
    table = iid_type_table(BERNOULLI, 16)
    pair = build_joint_pair(table, entropy(BERNOULLI), 0.0)
    return float(verify_tradeoff(pair, table).holds)


ORACLES: tuple[Oracle, ...] = (
    Oracle("entropy of Bernoulli(0.11)", lambda: entropy(BERNOULLI), H_BERNOULLI, 1e-6),
    Oracle("varentropy of Bernoulli(0.11)", lambda: varentropy(BERNOULLI), 0.427940, 1e-6),
    Oracle("psi of Bernoulli(0.11) at s=0.5", lambda: renyi_psi(BERNOULLI, 0.5), 0.243062, 1e-6),
    Oracle(
        "distance to uniform on three symbols",
        lambda: variational_distance(SKEWED, FiniteDistribution.uniform(3)),
        1 / 6,
        1e-9,
    ),
    Oracle(
        "divergence of uniform from (0.9, 0.1)",
        lambda: kl_divergence(FiniteDistribution.uniform(2), FiniteDistribution.from_probs([0.9, 0.1])),
        0.510826,
        1e-6,
    ),
    Oracle("truncated entropy at M=4", lambda: truncated_entropy(SKEWED, math.log(4)), 0.346574, 1e-6),
    Oracle(
        "class mass of Bernoulli(0.11)^2 with one 1",
        lambda: float(iid_type_table(BERNOULLI, 2).class_mass[1]),
        0.1958,
        1e-9,
    ),
    Oracle(
        "stationary law of a two-state chain",
        lambda: float(markov_stationary(parse_markov("[[0.9,0.1],[0.5,0.5]]")).probs[0]),
        5 / 6,
        1e-9,
    ),
    Oracle(
        "entropy rate of the symmetric chain",
        lambda: markov_entropy_rate(parse_markov(SYMMETRIC_CHAIN)),
        0.500402,
        1e-6,
    ),
    Oracle(
        "varentropy of the symmetric chain",
        lambda: markov_varentropy(parse_markov(SYMMETRIC_CHAIN)),
        0.307490,
        1e-6,
    ),
    Oracle("spectrum quantile at eps=0.9", lambda: quantile_rate(_spectrum_b2(), 0.9), 1.161904, 1e-6),
    Oracle(
        "second-order quantile at eps=0.5",
        lambda: second_order_quantile(_spectrum_b2(), 0.5, H_BERNOULLI),
        -0.325242,
        1e-5,
    ),
    Oracle("tail exponent at a=1", lambda: sigma_exponent(_spectrum_b2(), 1.0), 0.785340, 1e-6),
    Oracle("normal CDF at -1.281552", lambda: std_normal_cdf(-1.281552), 0.1, 1e-6),
    Oracle("normal quantile at 0.975", lambda: std_normal_quantile(0.975), 1.959964, 1e-6),
    Oracle("Gaussian second-order term", lambda: gaussian_second_order(0.427940, 0.9), 0.838369, 1e-5),
    Oracle(
        "threshold code error with M=3",
        lambda: build_threshold_code(iid_type_table(BERNOULLI, 2), math.log(3)).error,
        0.0121,
        1e-9,
    ),
    Oracle(
        "smallest code for eps=0.01",
        lambda: min_log_size_for_error(iid_type_table(BERNOULLI, 2), 0.01),
        math.log(4),
        1e-12,
    ),
    Oracle(
        "balancing extractor distance with M=3",
        lambda: extractor_distance(build_extractor(outcome_table(FOUR), 3)),
        1 / 15,
        1e-9,
    ),
    Oracle("divergence of loads to uniform", lambda: extractor_kl(_loads([0.5, 0.3, 0.2])), 0.068960, 1e-6),
    Oracle(
        "divergence of uniform to loads",
        lambda: extractor_kl(_loads([0.5, 0.3, 0.2]), KLDirection.FROM_UNIFORM),
        0.070241,
        1e-6,
    ),
    Oracle(
        "largest extractor for eps=0.05",
        lambda: max_log_size_for_distance(outcome_table(FOUR), 0.05).log_size,
        math.log(2),
        1e-12,
    ),
    Oracle(
        "Gaussian lower bound at b=0",
        lambda: kl_rate_lower_bound(GaussianLimit(1.0), 0.0, "second"),
        0.398942,
        1e-6,
    ),
    Oracle("S*_2 of Bernoulli(0.11), delta=0.1", lambda: s_star_family(BERNOULLI, 0.1).s_star_2, 0.5852, 1e-3),
    Oracle("S*_2 of uniform over 4", lambda: s_star_family(FiniteDistribution.uniform(4), 0.3).s_star_2, math.log(4), 1e-9),
    Oracle("second-order S* at delta=phi(0)", lambda: s_star_second_order(1.0, 0.398942280401)[0], 0.0, 1e-8),
    Oracle("uniform gap of (0.5, 0.25, 0.25)", lambda: delta_uniform_gap(SKEWED)[0], 1 / 6, 1e-12),
    Oracle("uniform gap of Bernoulli(0.11)", lambda: delta_uniform_gap(BERNOULLI)[0], 0.11, 1e-12),
    Oracle(
        "trade-off at n=16 holds",
        _tradeoff_holds,
        1.0,
        0.0,
    ),
    Oracle(
        "universal code at n=2 includes every type",
        lambda: universal_type_code(2, 2, math.log(2), 0.0).log_total_size,
        math.log(4),
        1e-12,
    ),
    Oracle(
        "universal code error at n=2",
        lambda: universal_code_error(universal_type_code(2, 2, math.log(2), 0.0), BERNOULLI),
        0.0,
        1e-12,
    ),
)


def run_oracles(oracles: tuple[Oracle, ...] = ORACLES) -> list[OracleResult]:
    """Evaluate every oracle; exceptions count as failures."""
    results = []
    for oracle in oracles:
        try:
            value = float(oracle.compute())
        except Exception as e:
            logger.warning("%s raised %s", oracle.name, e)
            value = math.nan
        passed = abs(value - oracle.expected) <= oracle.tolerance
        results.append(OracleResult(oracle.name, value, oracle.expected, passed))
    return results
