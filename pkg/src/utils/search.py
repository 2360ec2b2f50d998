"""One-dimensional search helpers: golden-section minimization and bisection."""

import logging
import math
from collections.abc import Callable

logger = logging.getLogger(__name__)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
MAX_ITERATIONS = 500


def golden_section_minimize(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10
) -> tuple[float, float]:
    """Minimize a unimodal ``f`` on [a, b]; returns (argmin, min).

    Interior points are re-evaluated only once per step.
    """
    if a > b:
        a, b = b, a
    c = b - (b - a) / GOLDEN_RATIO
    d = a + (b - a) / GOLDEN_RATIO
    fc, fd = f(c), f(d)
    steps = 0
    while abs(b - a) > tol and steps < MAX_ITERATIONS:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) / GOLDEN_RATIO
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) / GOLDEN_RATIO
            fd = f(d)
        steps += 1
    x = (a + b) / 2.0
    logger.debug("golden section finished after %d steps at %.12g", steps, x)
    return x, f(x)


def bisect_increasing(
    g: Callable[[float], float],
    target: float,
    lo: float,
    hi: float,
    tol: float = 1e-12,
) -> float:
    """Solve g(x) = target for non-decreasing g on a bracket [lo, hi].

    The bracket is widened geometrically on either side until it straddles
    the target.
    """
    width = max(1.0, hi - lo)
    for _ in range(MAX_ITERATIONS):
        if g(lo) <= target:
            break
        lo -= width
        width *= 2.0
    width = max(1.0, hi - lo)
    for _ in range(MAX_ITERATIONS):
        if g(hi) >= target:
            break
        hi += width
        width *= 2.0
    for _ in range(MAX_ITERATIONS):
        if hi - lo <= tol * max(1.0, abs(lo), abs(hi)):
            break
        mid = (lo + hi) / 2.0
        if g(mid) < target:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0
