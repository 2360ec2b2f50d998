"""Experiment sweeps behind the ``rates``, ``tradeoff``, ``universal``, ``kl`` and ``spectrum`` commands.

Every sweep point is an independent task described by plain picklable values,
so points can run in a process pool; results are reassembled in config order.
"""

import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor, as_completed
from pathlib import Path
from typing import Any, NamedTuple, TypeVar

from ..coding.threshold import min_log_size_for_error, second_order_coefficient
from ..core.bounds import BOUND_SLACK
from ..core.distribution import FiniteDistribution
from ..core.errors import ConfigError
from ..database.manager import TableCache
from ..randomness.criteria import max_log_size_for_distance
from ..randomness.kl_rates import (
    build_kl_optimal_code,
    s_star_family,
    s_star_second_order,
)
from ..sources.explicit import ExplicitSource
from ..sources.markov import MarkovSource, markov_loglik_moments, markov_path_distribution
from ..sources.types import TypeClassTable
from ..spectrum.cdf import (
    SpectrumCDF,
    s_star_2_from_spectrum,
    s_star_from_spectrum,
    spectrum_cdf,
    spectrum_from_distribution,
)
from ..spectrum.normal import gaussian_second_order
from ..tradeoff.joint import build_joint_pair, tradeoff_row
from ..universal.types_code import universal_extractor_distance, universal_type_code
from .config import ExperimentConfig
from .reports import (
    KL_HEADER,
    RATES_HEADER,
    SPECTRUM_HEADER,
    TRADEOFF_HEADER,
    UNIVERSAL_HEADER,
    Report,
)
from .sources import (
    Source,
    dispersion,
    entropy_rate,
    parse_source,
    resolve_rate,
    table_for,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")
PointResult = tuple[list[dict[str, Any]], Any]


def run_points(
    worker: Callable[[T], PointResult], tasks: Sequence[T], jobs: int = 1
) -> list[PointResult]:
    """Evaluate every task, concurrently when ``jobs > 1``, in task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    results: list[PointResult | None] = [None] * len(tasks)
    with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as ex:
        futures = {ex.submit(worker, t): i for i, t in enumerate(tasks)}
        for fut in as_completed(futures):
            i = futures[fut]
            results[i] = fut.result()
            logger.info("sweep point %d/%d done", i + 1, len(tasks))
    return [r for r in results if r is not None]


def _open_cache(path: str | None) -> TableCache | None:
    return TableCache(path) if path else None


def _cache_arg(config: ExperimentConfig) -> str | None:
    return str(config.cache) if config.cache else None


def _needs_table(source: Source, n: int, cache: TableCache | None) -> TypeClassTable:
    table = table_for(source, n, cache)
    if table is None:
        raise ConfigError("this command needs an i.i.d. or explicit source", "source")
    return table


def _collect(command: str, header: tuple[str, ...], results: list[PointResult], meta: dict[str, Any]) -> Report:
    rows = [row for point_rows, _ in results for row in point_rows]
    document = [doc for _, doc in results]
    return Report(command, header, rows, document, meta)


class RatesTask(NamedTuple):
    source: str
    n: int
    eps: float
    cache: str | None


def rates_point(task: RatesTask) -> PointResult:
    """Optimal code and extractor sizes at one (n, eps), with the Gaussian prediction."""
    source = parse_source(task.source)
    n, eps = task.n, task.eps
    h = entropy_rate(source, n)
    v = dispersion(source, n)
    prediction = gaussian_second_order(v, 1.0 - eps)
    prediction_ext = gaussian_second_order(v, eps)
    table = table_for(source, n, _open_cache(task.cache))
    if table is not None:
        method = "exact"
        log_code = min_log_size_for_error(table, eps)
        log_ext = max_log_size_for_distance(table, eps).log_size
    else:
        assert isinstance(source, MarkovSource)
        # normal approximation with the exact finite-n moments
        method = "normal"
        mean, var = markov_loglik_moments(source, n)
        log_code = mean + gaussian_second_order(var, 1.0 - eps)
        log_ext = mean + gaussian_second_order(var, eps)
    b_code = second_order_coefficient(log_code, n, h)
    b_ext = second_order_coefficient(log_ext, n, h)
    row = {
        "n": n,
        "eps": eps,
        "method": method,
        "entropy_rate": h,
        "varentropy": v,
        "logM_code": log_code,
        "b_code": b_code,
        "logM_ext": log_ext,
        "b_ext": b_ext,
        "gaussian_prediction": prediction,
        "gap": b_code - prediction,
        "gaussian_prediction_ext": prediction_ext,
        "gap_ext": b_ext - prediction_ext,
    }
    return [row], row


def run_rates(config: ExperimentConfig) -> Report:
    """Second-order coding and extraction rates over every (n, eps)."""
    config.require("source", "n_list", "eps_list")
    assert config.source is not None
    parse_source(config.source)
    tasks = [
        RatesTask(config.source, n, eps, _cache_arg(config))
        for n in config.n_list
        for eps in config.eps_list
    ]
    results = run_points(rates_point, tasks, config.jobs)
    return _collect("rates", RATES_HEADER, results, {"source": config.source})


class TradeoffTask(NamedTuple):
    source: str
    n: int
    a: str | float
    b: float
    cache: str | None


def tradeoff_point(task: TradeoffTask) -> PointResult:
    """Joint pair at one n and its trade-off check."""
    source = parse_source(task.source)
    table = _needs_table(source, task.n, _open_cache(task.cache))
    a = resolve_rate(task.a, source, task.n)
    pair = build_joint_pair(table, a, task.b)
    row: dict[str, Any] = dict(tradeoff_row(pair))
    row["holds"] = row["sum"] >= row["delta_pn"] - BOUND_SLACK
    doc = {**pair.to_json(), "sum": row["sum"], "delta_pn": row["delta_pn"], "holds": row["holds"]}
    return [row], doc


def run_tradeoff(config: ExperimentConfig) -> Report:
    """Code error plus extractor distance of the shared-encoder pair against delta(p_n)."""
    config.require("source", "n_list")
    assert config.source is not None
    parse_source(config.source)
    tasks = [
        TradeoffTask(config.source, n, config.a, config.b, _cache_arg(config))
        for n in config.n_list
    ]
    results = run_points(tradeoff_point, tasks, config.jobs)
    return _collect("tradeoff", TRADEOFF_HEADER, results, {"source": config.source})


class UniversalTask(NamedTuple):
    n: int
    d: int
    a: float
    b: float
    evals: tuple[str, ...]


def universal_point(task: UniversalTask) -> PointResult:
    """Universal type code at one n, evaluated under each source."""
    ucode = universal_type_code(task.n, task.d, task.a, task.b)
    named: list[tuple[str, FiniteDistribution]] = []
    for spec in task.evals:
        p = parse_source(spec)
        if not isinstance(p, FiniteDistribution):
            raise ConfigError(f"{spec!r} is not an i.i.d. source", "eval")
        named.append((spec, p))
    base = {
        "n": task.n,
        "d": task.d,
        "a": task.a,
        "b": task.b,
        "log_size": ucode.log_total_size,
        "second_order_b": ucode.second_order_b,
    }
    doc = ucode.to_json(named)
    bounds = []
    rows = []
    for (spec, p), entry in zip(named, doc["errors"], strict=True):
        ext = universal_extractor_distance(task.n, task.d, task.a, task.b, p)
        bounds.append({"P": spec, "bound": ext.bound, "refined": ext.refined})
        rows.append(
            {
                **base,
                "source": spec,
                "error": entry["error"],
                "extractor_bound": ext.bound,
                "extractor_bound_refined": ext.refined,
            }
        )
    doc["extractor_bounds"] = bounds
    return rows or [base], doc


def run_universal(config: ExperimentConfig) -> Report:
    """Source-independent type code over every n."""
    config.require("d", "n_list")
    assert config.d is not None
    if config.source is not None:
        a = resolve_rate(config.a, parse_source(config.source))
    elif isinstance(config.a, float):
        a = config.a
    else:
        try:
            a = float(config.a)
        except ValueError:
            raise ConfigError("a symbolic rate needs --source to resolve against", "a") from None
    tasks = [
        UniversalTask(n, config.d, a, config.b, tuple(config.eval_sources))
        for n in config.n_list
    ]
    results = run_points(universal_point, tasks, config.jobs)
    return _collect("universal", UNIVERSAL_HEADER, results, {"d": config.d})


class KLTask(NamedTuple):
    source: str
    delta: float
    n: int | None
    cache: str | None


def kl_point(task: KLTask) -> PointResult:
    """KL rates for one delta, plus the constructed code when n is given."""
    source = parse_source(task.source)
    delta, n = task.delta, task.n
    row: dict[str, Any] = {"delta": delta, "n": n}
    table: TypeClassTable | None = None
    if isinstance(source, ExplicitSource):
        assert n is not None
        table = _needs_table(source, n, None)
        f = spectrum_cdf(table)
        row["s_star"] = s_star_from_spectrum(f, delta)
        row["s_star_2"] = s_star_2_from_spectrum(f, delta)
    else:
        family = s_star_family(source, delta)
        row.update(
            s_star=family.s_star,
            s_star_1=family.s_star_1,
            s_star_2=family.s_star_2,
            s_star_2_minimizer=family.minimizer,
        )
        v = dispersion(source)
        if v > 0:
            row["b_star"], row["b_star_1"] = s_star_second_order(v, delta)
        table = None if n is None else table_for(source, n, _open_cache(task.cache))
    if table is not None and n is not None:
        code = build_kl_optimal_code(table, entropy_rate(source, n) + delta)
        row.update(
            logM=code.extractor.log_size,
            kl_per_n=code.kl_per_n,
            epsilon_n=code.epsilon_n,
            decoding_error=code.decoding_error,
        )
        return [row], {**row, "construction": code.to_json()}
    return [row], row


def run_kl(config: ExperimentConfig) -> Report:
    """S*, S*_1, S*_2 and their second-order forms; constructed-code KL when n is given."""
    config.require("source", "delta_list")
    assert config.source is not None
    source = parse_source(config.source)
    if isinstance(source, ExplicitSource):
        config.require("n_list")
    lengths: list[int | None] = list(config.n_list) or [None]
    tasks = [
        KLTask(config.source, delta, n, _cache_arg(config))
        for n in lengths
        for delta in config.delta_list
    ]
    results = run_points(kl_point, tasks, config.jobs)
    return _collect("kl", KL_HEADER, results, {"source": config.source})


class SpectrumTask(NamedTuple):
    source: str
    n: int
    cache: str | None


def _spectrum_of(source: Source, n: int, cache: TableCache | None) -> SpectrumCDF:
    if isinstance(source, MarkovSource):
        return spectrum_from_distribution(markov_path_distribution(source, n), n)
    return spectrum_cdf(_needs_table(source, n, cache))


def spectrum_point(task: SpectrumTask) -> PointResult:
    """Atoms of the spectrum of p_n."""
    source = parse_source(task.source)
    f = _spectrum_of(source, task.n, _open_cache(task.cache))
    rows = [
        {"n": task.n, "value": float(x), "mass": float(m), "cumulative": float(c)}
        for x, m, c in zip(f.values, f.masses, f.cumulative, strict=True)
    ]
    return rows, {"n": task.n, "atoms": [{k: r[k] for k in SPECTRUM_HEADER} for r in rows]}


def run_spectrum(config: ExperimentConfig) -> Report:
    """Spectrum CDF of -(1/n) log p_n for every n."""
    config.require("source", "n_list")
    assert config.source is not None
    parse_source(config.source)
    tasks = [SpectrumTask(config.source, n, _cache_arg(config)) for n in config.n_list]
    results = run_points(spectrum_point, tasks, config.jobs)
    return _collect("spectrum", ("n", *SPECTRUM_HEADER), results, {"source": config.source})


COMMANDS: dict[str, Callable[[ExperimentConfig], Report]] = {
    "rates": run_rates,
    "tradeoff": run_tradeoff,
    "universal": run_universal,
    "kl": run_kl,
    "spectrum": run_spectrum,
}


def run_command(config: ExperimentConfig) -> Report:
    """Dispatch on ``config.command``."""
    return COMMANDS[config.command](config)


def default_cache_path() -> Path:
    """Cache file used when ``--cache`` is given without a value."""
    return Path("socint-cache.db")
