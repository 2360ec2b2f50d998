"""Markov sources: stationary analysis, entropy rate and dispersion.

Transition matrices are column-stochastic, ``Q[j, i]`` = probability of
moving from state i (input) to state j (output). Most numerical libraries
use the row-stochastic transpose; every function here expects columns to
sum to one.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.special import entr

from ..core.distribution import FiniteDistribution
from ..core.errors import (
    CapacityError,
    ConvergenceError,
    DomainError,
    InvalidDistributionError,
    NotIrreducibleError,
)

logger = logging.getLogger(__name__)

COLUMN_TOLERANCE = 1e-12
STATIONARY_TOLERANCE = 1e-14
STATIONARY_RESIDUAL_LIMIT = 1e-12
MAX_POWER_ITERATIONS = 1_000_000
MAX_DP_STATES = 64
NEGATIVE_VARIANCE_LIMIT = -1e-12
MAX_PATHS = 1 << 20


def is_irreducible(transition: NDArray[np.float64]) -> bool:
    """Reachability closure of the transition graph covers every pair."""
    d = transition.shape[0]
    reach = (transition > 0) | np.eye(d, dtype=bool)
    for _ in range(max(1, math.ceil(math.log2(d)) + 1)):
        nxt = (reach.astype(np.int64) @ reach.astype(np.int64)) > 0
        if np.array_equal(nxt, reach):
            break
        reach = nxt
    return bool(reach.all())


@dataclass(frozen=True, eq=False)
class MarkovSource:
    """Irreducible Markov chain with column-stochastic transition matrix."""

    transition: NDArray[np.float64]
    initial: FiniteDistribution | None = None
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        q = np.asarray(self.transition, dtype=float).copy()
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] == 0:
            raise InvalidDistributionError(f"transition must be square, got {q.shape}")
        if np.any(q < 0) or not np.all(np.isfinite(q)):
            raise InvalidDistributionError("transition entries must be finite and >= 0")
        sums = q.sum(axis=0)
        bad = np.flatnonzero(np.abs(sums - 1.0) > COLUMN_TOLERANCE)
        if bad.size:
            raise InvalidDistributionError(
                f"column {int(bad[0])} sums to {sums[bad[0]]!r}; columns must be "
                "stochastic (Q[j, i] is the move from i to j)"
            )
        if not is_irreducible(q):
            raise NotIrreducibleError("transition matrix is not irreducible")
        labels = self.labels or tuple(str(i) for i in range(q.shape[0]))
        if len(labels) != q.shape[0]:
            raise InvalidDistributionError("one label per state is required")
        if self.initial is not None and self.initial.size != q.shape[0]:
            raise InvalidDistributionError("initial distribution must cover every state")
        q.setflags(write=False)
        object.__setattr__(self, "transition", q)
        object.__setattr__(self, "labels", labels)

    @property
    def num_states(self) -> int:
        """Number of states d."""
        return int(self.transition.shape[0])

    def start(self) -> FiniteDistribution:
        """The initial distribution (the stationary one when unset)."""
        return self.initial if self.initial is not None else markov_stationary(self)

    def relabeled(self, perm: list[int]) -> "MarkovSource":
        """Same chain with state k renamed to perm[k]."""
        inv = np.argsort(perm)
        q = self.transition[np.ix_(inv, inv)]
        initial = None
        if self.initial is not None:
            initial = FiniteDistribution.from_probs(self.initial.probs[inv])
        return MarkovSource(q, initial)


def parse_markov(text: str) -> MarkovSource:
    """Parse a JSON list of columns or the text form ``q11,q12;q21,q22``.

    The text form lists the matrix Q[j, i] row by row: rows are separated by
    ``;`` and entries within a row by ``,``, so each *column* must sum to one.
    """
    text = text.strip()
    try:
        if text.startswith("["):
            columns = json.loads(text)
            q = np.array(columns, dtype=float).T
        else:
            q = np.array(
                [[float(x) for x in row.split(",")] for row in text.split(";")],
                dtype=float,
            )
    except (ValueError, json.JSONDecodeError) as e:
        raise InvalidDistributionError(f"cannot parse transition matrix {text!r}") from e
    return MarkovSource(q)


def markov_stationary(source: MarkovSource) -> FiniteDistribution:
    """Stationary distribution pi with Q pi = pi.

    Dense power iteration on the lazy chain (I + Q) / 2, which has the same
    fixed point and is aperiodic, with Aitken extrapolation whenever it lowers
    the residual.
    """
    q = source.transition
    d = source.num_states
    lazy = 0.5 * (np.eye(d) + q)

    def residual(v: NDArray[np.float64]) -> float:
        return float(np.max(np.abs(q @ v - v)))

    x = np.full(d, 1.0 / d)
    for it in range(MAX_POWER_ITERATIONS):
        x1 = lazy @ x
        x2 = lazy @ x1
        denom = x2 - 2.0 * x1 + x
        with np.errstate(divide="ignore", invalid="ignore"):
            acc = np.where(np.abs(denom) > 1e-300, x2 - (x2 - x1) ** 2 / denom, x2)
        nxt = x2 / x2.sum()
        if np.all(np.isfinite(acc)) and np.all(acc >= -1e-15):
            acc = np.clip(acc, 0.0, None)
            acc = acc / acc.sum()
            if residual(acc) < residual(nxt):
                nxt = acc
        x = nxt
        if residual(x) <= STATIONARY_TOLERANCE:
            logger.debug("stationary distribution converged after %d steps", it + 1)
            break
    if residual(x) > STATIONARY_RESIDUAL_LIMIT:
        raise ConvergenceError(
            f"stationary iteration stalled at residual {residual(x):.3e}"
        )
    return FiniteDistribution(source.labels, x)


def _surprisal(q: NDArray[np.float64]) -> NDArray[np.float64]:
    """-log Q with 0 where the transition is impossible."""
    with np.errstate(divide="ignore"):
        return np.where(q > 0, -np.log(np.where(q > 0, q, 1.0)), 0.0)


def markov_entropy_rate(source: MarkovSource) -> float:
    """H(Q) = -sum_{j,i} pi_i Q[j,i] log Q[j,i]."""
    pi = markov_stationary(source).probs
    per_state = entr(source.transition).sum(axis=0)
    return math.fsum((pi * per_state).tolist())


def markov_varentropy(source: MarkovSource) -> float:
    """Asymptotic variance V(Q) of -log Q^n, i.e. lim Var / n.

    Decomposes each step's surprisal into a martingale increment plus a
    function of the current state and sums every lag through the fundamental
    matrix. When all states have the same conditional entropy only the
    single-step variance survives and this equals :func:`lag_one_varentropy`.
    """
    q = source.transition
    d = source.num_states
    pi = markov_stationary(source).probs
    g = _surprisal(q)
    cond_mean = (q * g).sum(axis=0)
    h = float(pi @ cond_mean)
    dev = np.where(q > 0, g - cond_mean[np.newaxis, :], 0.0)
    cond_var = (q * dev * dev).sum(axis=0)
    u = cond_mean - h
    fundamental = np.eye(d) - q.T + np.outer(np.ones(d), pi)
    w = np.linalg.solve(fundamental, u)
    state_var = 2.0 * float(pi @ (u * w)) - float(pi @ (u * u))
    cross = float(np.sum(pi[np.newaxis, :] * q * dev * w[:, np.newaxis]))
    v = float(pi @ cond_var) + state_var + 2.0 * cross
    return _checked_variance(v)


def lag_one_varentropy(source: MarkovSource) -> float:
    """Single-step variance plus the lag-1 cross-covariance term only."""
    q = source.transition
    pi = markov_stationary(source).probs
    h = markov_entropy_rate(source)
    a = np.where(q > 0, q * (_surprisal(q) - h), 0.0)
    first = float(np.sum(pi[np.newaxis, :] * np.where(q > 0, q * (_surprisal(q) - h) ** 2, 0.0)))
    cross = float(a.sum(axis=0) @ (a @ pi))
    return _checked_variance(first + 2.0 * cross)


def _checked_variance(v: float) -> float:
    if v < NEGATIVE_VARIANCE_LIMIT:
        raise ConvergenceError(f"variance evaluated to {v!r} < 0")
    if v < 0:
        logger.warning("clamping tiny negative variance %.3e to 0", v)
        return 0.0
    return v


def markov_loglik_moments(source: MarkovSource, n: int) -> tuple[float, float]:
    """Exact mean and variance of -log Q^n(w_1..w_n) by a transfer program.

    Each state carries (probability, first moment, second moment) of the
    centred log-likelihood of the paths ending there; one step costs O(d^2).
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if source.num_states > MAX_DP_STATES:
        raise DomainError(f"moment program supports at most {MAX_DP_STATES} states")
    q = source.transition
    init = source.start()
    h = markov_entropy_rate(source)
    with np.errstate(divide="ignore"):
        first = np.where(init.probs > 0, -init.log_probs - h, 0.0)
    p = init.probs.copy()
    m1 = p * first
    m2 = p * first * first
    step = np.where(q > 0, _surprisal(q) - h, 0.0)
    k1 = q * step
    k2 = q * step * step
    for _ in range(n - 1):
        p, m1, m2 = q @ p, q @ m1 + k1 @ p, q @ m2 + 2.0 * (k1 @ m1) + k2 @ p
    centred_mean = math.fsum(m1.tolist())
    variance = math.fsum(m2.tolist()) - centred_mean * centred_mean
    return centred_mean + n * h, max(0.0, variance)


def markov_path_distribution(source: MarkovSource, n: int) -> FiniteDistribution:
    """Brute-force distribution of all d^n paths (small n only)."""
    paths = source.num_states**n
    if paths > MAX_PATHS:
        raise CapacityError("path enumeration", paths, MAX_PATHS)
    init = source.start()
    q = source.transition
    labels = []
    probs = []
    for path in itertools.product(range(source.num_states), repeat=n):
        prob = float(init.probs[path[0]])
        for a, b in itertools.pairwise(path):
            prob *= float(q[b, a])
        labels.append("-".join(source.labels[s] for s in path))
        probs.append(prob)
    return FiniteDistribution.from_probs(probs, labels)


def markov_renyi_psi(source: MarkovSource, s: float) -> float:
    """log of the Perron root of the entrywise power Q^s.

    This is the limit (1/n) log sum_w Q^n(w)^s; only the eigenvalue enters,
    so no normalization of the tilted eigenvector is needed.
    """
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if s == 1.0:
        return 0.0
    tilted = np.where(source.transition > 0, source.transition**s, 0.0)
    root = float(np.max(np.linalg.eigvals(tilted).real))
    return math.log(root)
