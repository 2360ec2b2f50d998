"""Rates under KL-divergence criteria.

Covers the lower-bound integrals of the spectrum, the i.i.d. closed forms
S*, S*_1 and S*_2 (first and second order), and the explicit code that
attains the first-order bound.
"""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
from numpy.typing import NDArray
from scipy.special import erfcx

from ..coding.threshold import ThresholdCode
from ..core.bounds import BoundCheck
from ..core.distribution import FiniteDistribution
from ..core.errors import DomainError
from ..core.logweight import LOG_ZERO, floor_exp, log_int, log_sum
from ..core.measures import entropy, renyi_psi
from ..sources.markov import MarkovSource, markov_entropy_rate, markov_renyi_psi
from ..sources.types import TypeClassTable
from ..spectrum.cdf import SpectrumCDF, lower_partial_moment
from ..spectrum.normal import std_normal_pdf, std_normal_quantile
from ..utils.search import bisect_increasing, golden_section_minimize
from .criteria import KLDirection, divergence_size_bound, extractor_kl
from .extractor import VirtualExtractor, build_virtual_extractor, compose, ml_decoding_error

logger = logging.getLogger(__name__)

S_MIN = 1e-9
S_MAX = 1.0 - 1e-9
GRID_POINTS = 256
S_TOLERANCE = 1e-10


@dataclass(frozen=True)
class GaussianLimit:
    """Normal(0, V) limit of the second-order spectrum."""

    variance: float


def point_mass_limit(value: float) -> SpectrumCDF:
    """Spectrum concentrated at one value (the i.i.d. first-order limit)."""
    return SpectrumCDF(1, np.array([value]), np.array([0.0]))


def gaussian_partial_moment(variance: float, b: float) -> float:
    """E[(b - X)+] for X ~ Normal(0, V)."""
    if variance < 0:
        raise DomainError(f"variance must be >= 0, got {variance}")
    if variance == 0:
        return max(b, 0.0)
    sd = math.sqrt(variance)
    z = b / sd
    # b Phi(z) + sd phi(z), with Phi/phi through the scaled complementary error function
    ratio = math.sqrt(math.pi / 2.0) * float(erfcx(-z / math.sqrt(2.0)))
    return max(0.0, sd * std_normal_pdf(z) * (1.0 + z * ratio))


def kl_rate_lower_bound(
    limit: SpectrumCDF | GaussianLimit, a_or_b: float, order: str = "first"
) -> float:
    """Integral of (a - x) over the limiting spectrum up to a, boundary atoms included."""
    if order not in ("first", "second"):
        raise DomainError(f"order must be 'first' or 'second', got {order!r}")
    if isinstance(limit, GaussianLimit):
        if order == "first":
            raise DomainError("a Gaussian limit describes the second-order spectrum")
        return gaussian_partial_moment(limit.variance, a_or_b)
    return lower_partial_moment(limit, a_or_b)


@dataclass(frozen=True)
class SStarFamily:
    """First-order KL rates for a given delta."""

    s_star: float
    s_star_1: float
    s_star_2: float
    minimizer: float


def _psi_for(source: FiniteDistribution | MarkovSource) -> tuple[Callable[[float], float], float, float]:
    """(psi, psi at s -> 0, entropy rate)."""
    if isinstance(source, MarkovSource):
        support = (source.transition > 0).astype(float)
        at_zero = math.log(float(np.max(np.linalg.eigvals(support).real)))
        return (lambda s: markov_renyi_psi(source, s)), at_zero, markov_entropy_rate(source)
    return (
        (lambda s: renyi_psi(source, s)),
        math.log(source.support_size),
        entropy(source),
    )


def s_grid() -> NDArray[np.float64]:
    """GRID_POINTS values of s from S_MIN to S_MAX, geometric toward both ends."""
    half = GRID_POINTS // 2
    low = np.geomspace(S_MIN, 0.5, half)
    high = 1.0 - np.geomspace(1.0 - S_MAX, 0.5, GRID_POINTS - half, endpoint=False)[::-1]
    return np.concatenate([low, high])


def s_star_family(source: FiniteDistribution | MarkovSource, delta: float) -> SStarFamily:
    """S* = H + delta, S*_1 = H and S*_2 = min over s of (s delta + psi(s)) / (1 - s).

    The objective is scanned on a grid crowded toward both ends of (0, 1),
    refined by golden section around the best grid point and compared with
    its s -> 0 limit, log of the support size. It grows without bound as
    s -> 1.
    """
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    psi, at_zero, h = _psi_for(source)

    def objective(s: float) -> float:
        return (s * delta + psi(s)) / (1.0 - s)

    grid = s_grid()
    values = np.array([objective(float(s)) for s in grid])
    best = int(np.argmin(values))
    lo = float(grid[max(best - 1, 0)])
    hi = float(grid[min(best + 1, grid.size - 1)])
    s_opt, f_opt = golden_section_minimize(objective, lo, hi, S_TOLERANCE)
    if values[best] < f_opt:
        s_opt, f_opt = float(grid[best]), float(values[best])
    if at_zero <= f_opt:
        s_opt, f_opt = 0.0, at_zero
    logger.debug("S*_2 minimizer s=%.6g value=%.12g", s_opt, f_opt)
    return SStarFamily(h + delta, h, f_opt, s_opt)


def s_star_second_order(variance: float, delta: float) -> tuple[float, float]:
    """(b with E[(b - X)+] = delta, sqrt(V) Phi^{-1}(1 - e^{-delta})) for X ~ Normal(0, V)."""
    if variance <= 0:
        raise DomainError("second-order KL rates need V > 0")
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    b = bisect_increasing(
        lambda x: gaussian_partial_moment(variance, x), delta, -1.0, 1.0, tol=1e-14
    )
    b1 = math.sqrt(variance) * std_normal_quantile(-math.expm1(-delta))
    return b, b1


@dataclass(frozen=True, eq=False)
class KLOptimalCode:
    """Code that is injective on {-(1/n) log p_n < a} and spreads the rest."""

    code: ThresholdCode
    extractor: VirtualExtractor
    kl_per_n: float
    epsilon_n: float
    decoding_error: float
    spread_size: int
    spread_check: BoundCheck | None

    def to_json(self) -> dict[str, Any]:
        """Report row."""
        return {
            "n": self.code.n,
            "logM_nats": self.extractor.log_size,
            "kl_per_n": self.kl_per_n,
            "epsilon_n": self.epsilon_n,
            "decoding_error": self.decoding_error,
            "spread_logM_nats": log_int(self.spread_size),
            "spread_bound_holds": None if self.spread_check is None else self.spread_check.holds,
        }


def build_kl_optimal_code(table: TypeClassTable, a: float) -> KLOptimalCode:
    """Injective map on S_n(a), balancing extractor with (1 - eps_n) e^{na} bins elsewhere.

    ``epsilon_n`` is p_n(S_n(a)). The spread part is checked against the
    size-parameterized divergence bound with M' = sqrt(M-hat), applied to the
    renormalized complement distribution.
    """
    n = table.n
    elem = table.per_element_log_prob
    inside = elem > -n * a
    order = table.order.tolist()
    injective = [c for c in order if inside[c]]
    outside = [c for c in order if not inside[c] and elem[c] > LOG_ZERO]
    epsilon_n = table.mass_where(inside)
    log_rest = log_sum(table.class_log_prob[outside].tolist()) if outside else LOG_ZERO
    spread_size = max(1, floor_exp(log_rest + n * a)) if outside else 0

    retained = tuple((c, table.counts[c]) for c in injective)
    spread_check = None
    if spread_size:
        spread = build_virtual_extractor(table, spread_size, outside)
        composite = compose(table, injective, spread)
        spread_check = _spread_bound(table, spread, outside, log_rest)
    else:
        composite = compose(table, injective, VirtualExtractor(n, 0, ()))
    code = ThresholdCode(
        table=table,
        log_size=composite.log_size,
        retained=retained,
        error=min(1.0, max(0.0, 1.0 - epsilon_n)),
    )
    kl = extractor_kl(composite, KLDirection.TO_UNIFORM) / n
    return KLOptimalCode(
        code=code,
        extractor=composite,
        kl_per_n=kl,
        epsilon_n=epsilon_n,
        decoding_error=ml_decoding_error(composite),
        spread_size=spread_size,
        spread_check=spread_check,
    )


def _spread_bound(
    table: TypeClassTable, spread: VirtualExtractor, outside: list[int], log_rest: float
) -> BoundCheck:
    """D(p-hat o phi^-1 || U) <= log M (M'/M + 1/M' + p-hat{p-hat > 1/M}), M' = sqrt(M)."""
    normalized = spread.rescaled(-log_rest)
    log_m = spread.log_size
    log_m_prime = 0.5 * log_m
    elem = table.per_element_log_prob[outside] - log_rest
    mass = np.exp(table.class_log_prob[outside] - log_rest)
    heavy = math.fsum(mass[elem > -log_m].tolist())
    rhs = divergence_size_bound(heavy, log_m, log_m_prime)
    return BoundCheck.upper(extractor_kl(normalized, KLDirection.TO_UNIFORM), rhs)
