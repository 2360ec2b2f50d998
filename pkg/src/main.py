"""Main entry point for the socint command-line tool."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any

from .cli.commands import default_cache_path, run_command
from .cli.config import merge_config
from .cli.reports import render, write_report
from .cli.selfcheck import run_oracles
from .core.errors import ConfigError, SocintError

logger = logging.getLogger("socint")


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="TOML file with a table named after the command")
    p.add_argument("--format", choices=["csv", "json"], default=None)
    p.add_argument("--output", type=Path, default=None, help="report file (stdout by default)")
    p.add_argument("--bits", action="store_true", default=None, help="print rates in bits")
    p.add_argument("--jobs", type=int, default=None, help="sweep points run in parallel")
    p.add_argument(
        "--cache",
        type=Path,
        nargs="?",
        const=default_cache_path(),
        default=None,
        help="sqlite file caching type-class tables",
    )


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per experiment."""
    parser = argparse.ArgumentParser(
        prog="socint",
        description="Finite-blocklength source coding and intrinsic randomness experiments",
    )
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="cmd", required=True)

    rates = sub.add_parser("rates", help="second-order code and extractor rates")
    rates.add_argument("--source")
    rates.add_argument("--n", type=_int_list)
    rates.add_argument("--eps", type=_float_list)
    _add_common(rates)

    tradeoff = sub.add_parser("tradeoff", help="code error + extractor distance of a shared encoder")
    tradeoff.add_argument("--source")
    tradeoff.add_argument("--n", type=_int_list)
    tradeoff.add_argument("--a", help="rate in nats, or H / H+x / H-x")
    tradeoff.add_argument("--b", type=float)
    _add_common(tradeoff)

    universal = sub.add_parser("universal", help="universal type-class code")
    universal.add_argument("--d", type=int)
    universal.add_argument("--n", type=_int_list)
    universal.add_argument("--a", help="rate in nats, or H relative to --source")
    universal.add_argument("--b", type=float)
    universal.add_argument("--source", help="source that a symbolic --a refers to")
    universal.add_argument("--eval", action="append", help="i.i.d. source to evaluate (repeatable)")
    _add_common(universal)

    kl = sub.add_parser("kl", help="rates under divergence criteria")
    kl.add_argument("--source")
    kl.add_argument("--delta", type=_float_list)
    kl.add_argument("--n", type=_int_list, help="also build the divergence-optimal code")
    _add_common(kl)

    spectrum = sub.add_parser("spectrum", help="spectrum of -(1/n) log p_n")
    spectrum.add_argument("--source")
    spectrum.add_argument("--n", type=_int_list)
    _add_common(spectrum)

    sub.add_parser("selfcheck", help="run the built-in oracle suite")
    return parser


def _flags(args: argparse.Namespace) -> dict[str, Any]:
    skip = {"cmd", "config", "verbose", "quiet"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def cmd_selfcheck() -> int:
    """Print one line per oracle; 1 when any fails."""
    results = run_oracles()
    failed = 0
    for r in results:
        if r.passed:
            print(f"✅ {r.name}: {r.value:.6g}", file=sys.stderr)
        else:
            failed += 1
            print(f"❌ {r.name}: got {r.value!r}, expected {r.expected!r}", file=sys.stderr)
    print(f"📊 {len(results) - failed}/{len(results)} checks passed", file=sys.stderr)
    return 1 if failed else 0


def cmd_experiment(args: argparse.Namespace) -> int:
    """Run one sweep and write its report."""
    config = merge_config(args.cmd, _flags(args), args.config)
    if config.cache:
        print(f"📁 Type-table cache: {config.cache}", file=sys.stderr)
    report = run_command(config)
    write_report(render(report, config.format, config.bits), config.output)
    where = config.output or "stdout"
    print(f"✅ {config.command}: {len(report.rows)} rows written to {where}", file=sys.stderr)
    return 0


def main(argv: list[str] | None = None) -> int:
    """Main entry point for the application."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    if args.cmd == "selfcheck":
        return cmd_selfcheck()
    try:
        return cmd_experiment(args)
    except ConfigError as e:
        print(f"⚠️ {e}", file=sys.stderr)
        return 2
    except SocintError as e:
        print(f"⚠️ {type(e).__name__}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
