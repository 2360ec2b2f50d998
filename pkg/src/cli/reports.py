"""Report rendering: fixed-header CSV or JSON, with optional nats-to-bits conversion."""

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

REPORT_FORMAT_VERSION = 1

RATES_HEADER = (
    "n",
    "eps",
    "method",
    "entropy_rate",
    "varentropy",
    "logM_code",
    "b_code",
    "logM_ext",
    "b_ext",
    "gaussian_prediction",
    "gap",
    "gaussian_prediction_ext",
    "gap_ext",
)
TRADEOFF_HEADER = (
    "n",
    "a",
    "b",
    "code_error",
    "extractor_distance",
    "sum",
    "delta_pn",
    "holds",
)
UNIVERSAL_HEADER = (
    "n",
    "d",
    "a",
    "b",
    "log_size",
    "second_order_b",
    "source",
    "error",
    "extractor_bound",
    "extractor_bound_refined",
)
KL_HEADER = (
    "delta",
    "n",
    "s_star",
    "s_star_1",
    "s_star_2",
    "s_star_2_minimizer",
    "b_star",
    "b_star_1",
    "logM",
    "kl_per_n",
    "epsilon_n",
    "decoding_error",
)
SPECTRUM_HEADER = ("value", "mass", "cumulative")

# powers of nats carried by each column; everything else is unitless
NAT_POWERS = {
    "entropy_rate": 1,
    "varentropy": 2,
    "logM_code": 1,
    "b_code": 1,
    "logM_ext": 1,
    "b_ext": 1,
    "gaussian_prediction": 1,
    "gap": 1,
    "gaussian_prediction_ext": 1,
    "gap_ext": 1,
    "a": 1,
    "b": 1,
    "log_size": 1,
    "second_order_b": 1,
    "delta": 1,
    "s_star": 1,
    "s_star_1": 1,
    "s_star_2": 1,
    "b_star": 1,
    "b_star_1": 1,
    "logM": 1,
    "kl_per_n": 1,
    "value": 1,
    "log_size_nats": 1,
    "a_nats": 1,
    "logM_nats": 1,
}


@dataclass
class Report:
    """Flat rows for CSV plus the nested document emitted as JSON."""

    command: str
    header: tuple[str, ...]
    rows: list[dict[str, Any]]
    document: Any = None
    meta: dict[str, Any] = field(default_factory=dict)


def _to_bits(value: Any, power: int) -> Any:
    if isinstance(value, float) and math.isfinite(value):
        return value / math.log(2) ** power
    return value


def convert_units(obj: Any, bits: bool, key: str | None = None) -> Any:
    """Divide nat-valued entries by (ln 2)^power, recursing through containers."""
    if not bits:
        return obj
    if isinstance(obj, dict):
        return {k: convert_units(v, bits, k) for k, v in obj.items()}
    if isinstance(obj, list):
        return [convert_units(v, bits, key) for v in obj]
    power = NAT_POWERS.get(key or "")
    return _to_bits(obj, power) if power else obj


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return value


def render_csv(report: Report, bits: bool = False) -> str:
    """Rows under the command's fixed header."""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(report.header), lineterminator="\n")
    writer.writeheader()
    for row in report.rows:
        converted = convert_units(row, bits)
        writer.writerow({k: _cell(converted.get(k)) for k in report.header})
    return buffer.getvalue()


def render_json(report: Report, bits: bool = False) -> str:
    """Versioned JSON document."""
    body = report.document if report.document is not None else report.rows
    payload = {
        "format_version": REPORT_FORMAT_VERSION,
        "command": report.command,
        "units": "bits" if bits else "nats",
        **report.meta,
        "results": convert_units(body, bits),
    }
    return json.dumps(payload, indent=2, allow_nan=True) + "\n"


def render(report: Report, fmt: str, bits: bool = False) -> str:
    """Dispatch on ``json`` or ``csv``."""
    return render_json(report, bits) if fmt == "json" else render_csv(report, bits)


def write_report(text: str, output: Path | None) -> None:
    """Write to ``output``, or stdout when it is None."""
    if output is None:
        print(text, end="")
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8")
