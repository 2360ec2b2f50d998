"""Exact information spectrum: the distribution of -(1/n) log p_n(w).

The CDF is right-continuous (``<=``) and quantiles are inf-style. Strict
variants are reached with ``inclusive=False``.
"""

import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import NDArray

from ..core.distribution import FiniteDistribution
from ..core.errors import DomainError
from ..core.logweight import LOG_ZERO, log_sum
from ..sources.types import TypeClassTable, outcome_table

TOTAL_MASS_TOLERANCE = 1e-9
ATOM_RTOL = 1e-12
ATOM_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class SpectrumCDF:
    """Atoms (value, mass) of the normalized log-likelihood, values increasing."""

    n: int
    values: NDArray[np.float64]
    log_masses: NDArray[np.float64]

    def __post_init__(self) -> None:
        if self.values.size == 0:
            raise DomainError("spectrum has no atoms")
        if np.any(np.diff(self.values) <= 0):
            raise DomainError("spectrum atoms must be strictly increasing")
        total = log_sum(self.log_masses.tolist())
        if abs(math.expm1(total)) > TOTAL_MASS_TOLERANCE:
            raise DomainError(f"spectrum carries total mass {math.exp(total)!r}")

    @cached_property
    def masses(self) -> NDArray[np.float64]:
        """Linear atom masses."""
        return np.exp(self.log_masses)

    @cached_property
    def cumulative(self) -> NDArray[np.float64]:
        """cumulative[i] = mass of atoms 0..i."""
        return np.cumsum(self.masses)

    @cached_property
    def log_tail(self) -> NDArray[np.float64]:
        """log_tail[i] = log mass of atoms i, i+1, ... (suffix from the small end)."""
        return np.logaddexp.accumulate(self.log_masses[::-1])[::-1]

    @property
    def num_atoms(self) -> int:
        """Number of distinct values."""
        return int(self.values.size)

    def to_csv(self) -> str:
        """CSV text with header ``value,mass,cumulative``."""
        buf = io.StringIO()
        buf.write("value,mass,cumulative\n")
        for v, m, c in zip(self.values, self.masses, self.cumulative, strict=True):
            buf.write(f"{v!r},{m!r},{c!r}\n")
        return buf.getvalue()


def spectrum_cdf(table: TypeClassTable) -> SpectrumCDF:
    """Merge classes of equal per-element log-probability into atoms.

    Classes with different compositions can share a true probability while
    their summed logs differ by a few ulps, so sorted neighbours within
    ``ATOM_RTOL`` are one atom.
    """
    elem = table.per_element_log_prob
    live = elem > LOG_ZERO
    order = np.argsort(-elem[live], kind="stable")
    sorted_elem = elem[live][order]
    sorted_mass = table.class_log_prob[live][order]
    starts = np.ones(sorted_elem.size, dtype=bool)
    starts[1:] = ~np.isclose(
        sorted_elem[1:], sorted_elem[:-1], rtol=ATOM_RTOL, atol=ATOM_ATOL
    )
    first = np.flatnonzero(starts)
    log_masses = np.array(
        [log_sum(group.tolist()) for group in np.split(sorted_mass, first[1:])]
    )
    # descending log-probability is ascending spectrum value
    values = -sorted_elem[first] / table.n
    keep = log_masses > LOG_ZERO
    return SpectrumCDF(table.n, values[keep], log_masses[keep])


def spectrum_from_distribution(p: FiniteDistribution, n: int = 1) -> SpectrumCDF:
    """Spectrum of a directly given p_n."""
    return spectrum_cdf(outcome_table(p, n))


def cdf_at(f: SpectrumCDF, a: float, inclusive: bool = True) -> float:
    """p_n{X <= a} (or ``< a`` when not inclusive)."""
    side = "right" if inclusive else "left"
    idx = int(np.searchsorted(f.values, a, side=side))
    if idx == 0:
        return 0.0
    return min(1.0, float(f.cumulative[idx - 1]))


def quantile_rate(f: SpectrumCDF, eps: float, inclusive: bool = True) -> float:
    """inf{a : p_n{X <= a} >= eps}.

    With ``inclusive=False`` the cumulative mass must strictly exceed eps;
    the two differ only when eps is exactly a cumulative value.
    """
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")
    side = "left" if inclusive else "right"
    idx = int(np.searchsorted(f.cumulative, eps, side=side))
    return float(f.values[min(idx, f.num_atoms - 1)])


def second_order_quantile(
    f: SpectrumCDF, eps: float, a: float, inclusive: bool = True
) -> float:
    """sqrt(n) * (quantile_rate(f, eps) - a)."""
    return math.sqrt(f.n) * (quantile_rate(f, eps, inclusive) - a)


def sigma_exponent(f: SpectrumCDF, a: float) -> float:
    """-(1/n) log p_n{X >= a}; +inf when no atom reaches a."""
    idx = int(np.searchsorted(f.values, a, side="left"))
    if idx >= f.num_atoms:
        return math.inf
    return max(0.0, -float(f.log_tail[idx]) / f.n)


def lower_partial_moment(f: SpectrumCDF, a: float) -> float:
    """sum over atoms x <= a of mass * (a - x); atoms at a contribute 0."""
    keep = f.values <= a
    return math.fsum((f.masses[keep] * (a - f.values[keep])).tolist())


def s_star_from_spectrum(f: SpectrumCDF, delta: float) -> float:
    """Largest a with lower_partial_moment(f, a) <= delta.

    The moment is piecewise linear and increasing past the first atom, so
    the root is found on the segment where it crosses delta.
    """
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    cum = f.cumulative
    first_moment = np.cumsum(f.masses * f.values)
    at_atoms = cum * f.values - first_moment
    k = int(np.searchsorted(at_atoms, delta, side="right")) - 1
    k = max(k, 0)
    return float(f.values[k] + (delta - at_atoms[k]) / cum[k])


def s_star_2_from_spectrum(f: SpectrumCDF, delta: float) -> float:
    """max over atoms a with sigma_exponent(f, a) < delta of a - sigma_exponent(f, a).

    A finite-n reading of the general-source formula; it says nothing about
    whether the limiting exponent exists.
    """
    if delta <= 0:
        raise DomainError(f"delta must be > 0, got {delta}")
    sigma = np.maximum(0.0, -f.log_tail / f.n)
    ok = sigma < delta
    return float(np.max(f.values[ok] - sigma[ok]))
