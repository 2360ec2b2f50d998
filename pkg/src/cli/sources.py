"""Source specifications accepted on the command line."""

import re

from ..core.distribution import FiniteDistribution, parse_distribution
from ..core.errors import ConfigError, SocintError
from ..core.measures import entropy, varentropy
from ..database.manager import TableCache
from ..sources.explicit import ExplicitSource
from ..sources.markov import (
    MarkovSource,
    markov_entropy_rate,
    markov_varentropy,
    parse_markov,
)
from ..sources.types import TypeClassTable, iid_type_table

Source = FiniteDistribution | MarkovSource | ExplicitSource

_RATE_EXPR = re.compile(r"^\s*H\s*(?:([+-])\s*([0-9.eE+-]+))?\s*$")


def parse_source(spec: str) -> Source:
    """Parse ``bernoulli:p``, ``uniform:d``, ``dist:...``, ``markov:...``,
    ``markov-json:...`` or ``explicit:path.json``."""
    kind, sep, body = spec.partition(":")
    if not sep:
        raise ConfigError(f"source {spec!r} needs the form kind:parameters", "source")
    try:
        match kind.strip().lower():
            case "bernoulli":
                return FiniteDistribution.bernoulli(float(body))
            case "uniform":
                return FiniteDistribution.uniform(int(body))
            case "dist":
                return parse_distribution(body)
            case "markov" | "markov-json":
                return parse_markov(body.strip().strip("\"'"))
            case "explicit":
                return ExplicitSource.from_json(body)
    except (ValueError, OSError) as e:
        if isinstance(e, SocintError):
            raise ConfigError(str(e), "source") from e
        raise ConfigError(f"bad parameters in {spec!r}: {e}", "source") from e
    raise ConfigError(f"unknown source kind {kind!r}", "source")


def _block(
    source: ExplicitSource, n: int | None, what: str
) -> tuple[FiniteDistribution, int]:
    if n is None:
        raise ConfigError(f"an explicit source needs a block length for its {what}", "n")
    if n not in source.per_n:
        raise ConfigError(f"no distribution given for n={n}; have {source.block_lengths}", "n")
    return source.per_n[n], n


def is_iid(source: Source) -> bool:
    """True for i.i.d. sources given by a single-letter distribution."""
    return isinstance(source, FiniteDistribution)


def entropy_rate(source: Source, n: int | None = None) -> float:
    """H(P), H(Q), or H(p_n)/n for an explicit source."""
    if isinstance(source, FiniteDistribution):
        return entropy(source)
    if isinstance(source, MarkovSource):
        return markov_entropy_rate(source)
    p_n, block = _block(source, n, "rate")
    return entropy(p_n) / block


def dispersion(source: Source, n: int | None = None) -> float:
    """V_P, V(Q), or Var(-log p_n)/n for an explicit source."""
    if isinstance(source, FiniteDistribution):
        return varentropy(source)
    if isinstance(source, MarkovSource):
        return markov_varentropy(source)
    p_n, block = _block(source, n, "dispersion")
    return varentropy(p_n) / block


def table_for(
    source: Source, n: int, cache: TableCache | None = None
) -> TypeClassTable | None:
    """Exact n-block table, or None for Markov sources."""
    if isinstance(source, FiniteDistribution):
        return iid_type_table(source, n, cache=cache)
    if isinstance(source, ExplicitSource):
        _block(source, n, "table")
        return source.table(n)
    return None


def resolve_rate(expr: str | float, source: Source, n: int | None = None) -> float:
    """A number, or ``H``, ``H+x``, ``H-x`` relative to the source's entropy rate."""
    if isinstance(expr, int | float):
        return float(expr)
    m = _RATE_EXPR.match(expr)
    if m is None:
        try:
            return float(expr)
        except ValueError:
            raise ConfigError(f"cannot read rate {expr!r}", "a") from None
    h = entropy_rate(source, n)
    if m.group(1) is None:
        return h
    offset = float(m.group(2))
    return h + offset if m.group(1) == "+" else h - offset
