#!/usr/bin/env python3
"""
detrc CLI - deterministic reservoir computing experiments.

Usage:
    detrc generate --tau 17 [--samples N]      Write a Mackey-Glass series
    detrc --config exp.json run                Run an experiment, write records
    detrc --config exp.json search             Hyper-parameter search
    detrc --config exp.json benchmark          Timing at matched state size
    detrc report records.csv                   Summarize a record report
"""
import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .config import ExperimentConfig, load_experiment_config
from .errors import ConfigError, DetRCError
from .mackey_glass import DEFAULT_DISCARD, MGParams, format_series, generate_dataset, save_series
from .models import VARIANT_NAMES, Variant, model_config_from_dict

logger = logging.getLogger("detrc")

LOG_LEVELS = {0: logging.WARNING, 1: logging.INFO}


def _configure_logging(verbosity: int) -> None:
    """Attach one handler to the package logger; rich on a terminal."""
    level_name = os.environ.get("DETRC_LOG_LEVEL")
    if verbosity:
        level = LOG_LEVELS.get(verbosity, logging.DEBUG)
    elif level_name:
        level = getattr(logging, level_name.upper(), logging.WARNING)
    else:
        level = logging.WARNING

    handler: logging.Handler
    if sys.stderr.isatty():
        try:
            from rich.console import Console
            from rich.logging import RichHandler

            handler = RichHandler(console=Console(stderr=True), show_path=False)
            handler.setFormatter(logging.Formatter("%(message)s"))
        except ImportError:
            handler = logging.StreamHandler()
    else:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))

    logger.handlers[:] = [handler]
    logger.setLevel(level)
    logger.propagate = False


def _print_table(table, to_stderr: bool) -> None:
    from rich.console import Console

    Console(stderr=to_stderr).print(table)


def _require_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError(f"'{args.command}' needs --config PATH")
    return load_experiment_config(args.config)


def _trial_log_path(out: str) -> Path:
    """best.json -> best.trials.jsonl next to it."""
    return Path(out).with_suffix(".trials.jsonl")


def _benchmark_config(args) -> ExperimentConfig:
    if args.config:
        return load_experiment_config(args.config)
    return ExperimentConfig(model=model_config_from_dict({"variant": Variant.TCRC_LM.value}))


def main(argv: Optional[Sequence[str]] = None) -> None:
    parser = argparse.ArgumentParser(
        prog="detrc",
        description="Deterministic reservoir computing on Mackey-Glass forecasting",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Version: %(prog)s """ + __version__ + """

Examples:
    detrc generate --tau 17 --samples 5000 --normalize --out mg17.txt
    detrc --config exp.json --format json --out records.json run --summary
    detrc --config exp.json search --space space.json --log trials.jsonl
    detrc --config exp.json benchmark --repeats 3 --size 300
    detrc --format json report records.csv

Environment:
    DETRC_MAX_WORKERS   Worker processes when --threads is absent
    DETRC_LOG_LEVEL     Log level when --verbose is absent
    NO_PROGRESS, CI     Disable progress bars
        """,
    )

    # Global flags
    parser.add_argument(
        "--version",
        action="version",
        version=f"%(prog)s {__version__}",
    )
    parser.add_argument("--config", help="Experiment configuration (JSON)")
    parser.add_argument("--out", help="Output path (stdout when absent)")
    parser.add_argument("--threads", type=int, help="Worker processes")
    parser.add_argument(
        "--format", choices=["csv", "json"], default="csv", help="Report format"
    )
    parser.add_argument(
        "-v", "--verbose", action="count", default=0,
        help="More logging (-v info, -vv debug)",
    )

    # Shell completion support
    try:
        import shtab
        shtab.add_argument_to(parser, ["--print-completion", "-s"])
    except ImportError:
        pass  # shtab is optional

    subparsers = parser.add_subparsers(dest="command", required=True)

    # detrc generate --tau T
    gen_p = subparsers.add_parser("generate", help="Write a Mackey-Glass series file")
    gen_p.add_argument("--tau", type=float, required=True, help="Delay tau")
    gen_p.add_argument("--samples", type=int, default=5000, help="Samples to emit")
    gen_p.add_argument(
        "--discard", type=int, default=None,
        help=f"Transient samples to drop (default {DEFAULT_DISCARD})",
    )
    gen_p.add_argument("--normalize", action="store_true", help="Z-score the series")

    # detrc run
    run_p = subparsers.add_parser("run", help="Run the experiment in --config")
    run_p.add_argument(
        "--no-timing", action="store_true",
        help="Omit wall-clock columns (byte-identical reports)",
    )
    run_p.add_argument("--summary", action="store_true", help="Print a summary table")

    # detrc search
    search_p = subparsers.add_parser("search", help="Hyper-parameter search")
    search_p.add_argument("--space", help="Search space (JSON); default per variant")
    search_p.add_argument(
        "--log", help="Append every trial to this JSONL file (default: next to --out)"
    )
    search_p.add_argument(
        "--final", action="store_true", help="Re-evaluate the winner on all trajectories"
    )

    # detrc benchmark
    bench_p = subparsers.add_parser("benchmark", help="Timing at matched state size")
    bench_p.add_argument("--repeats", type=int, default=3, help="Timings per variant")
    bench_p.add_argument("--size", type=int, help="Target state size")
    bench_p.add_argument(
        "--variants", nargs="+", choices=VARIANT_NAMES, help="Variants to time (default all)"
    )

    # detrc report PATH
    report_p = subparsers.add_parser("report", help="Summarize a record report")
    report_p.add_argument("path", help="CSV or JSON record report")

    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    from .harness import aggregate, benchmark, run_experiment
    from .report import benchmark_table, emit_report, read_report, summary_table

    try:
        if args.command == "generate":
            base = MGParams()
            discard = DEFAULT_DISCARD
            if args.config:
                dataset = load_experiment_config(args.config).dataset
                base, discard = dataset.base, dataset.discard
            if args.discard is not None:
                discard = args.discard
            series = generate_dataset(
                base.with_tau(args.tau), args.samples, discard, normalize=args.normalize
            )
            if args.out:
                save_series(series, args.out)
            else:
                sys.stdout.write(format_series(series))

        elif args.command == "run":
            cfg = _require_config(args)
            records = run_experiment(cfg, workers=args.threads)
            out = args.out or cfg.output
            text = emit_report(records, args.format, out, include_timing=not args.no_timing)
            if not out:
                sys.stdout.write(text)
            if args.summary:
                _print_table(summary_table(aggregate(records)), to_stderr=not out)

        elif args.command == "search":
            from .search import default_search_space, load_search_space, search

            cfg = _require_config(args)
            space = (
                load_search_space(args.space)
                if args.space
                else default_search_space(cfg.model.variant)
            )
            log = args.log
            if log is None and args.out:
                log = _trial_log_path(args.out)
            result = search(space, cfg, log=log, workers=args.threads)
            best = json.dumps(result.best_config.to_dict(), indent=2) + "\n"
            if args.out:
                out = Path(args.out)
                out.parent.mkdir(parents=True, exist_ok=True)
                out.write_text(best)
            else:
                sys.stdout.write(best)
            if args.final:
                records = run_experiment(result.best_config, workers=args.threads)
                _print_table(summary_table(aggregate(records)), to_stderr=not args.out)

        elif args.command == "benchmark":
            cfg = _benchmark_config(args)
            rows = benchmark(cfg, args.repeats, variants=args.variants, size=args.size)
            text = emit_report(rows, args.format, args.out)
            if args.out:
                _print_table(benchmark_table(rows), to_stderr=False)
            else:
                sys.stdout.write(text)

        elif args.command == "report":
            rows = aggregate(read_report(args.path))
            text = emit_report(rows, args.format, args.out)
            if args.out:
                _print_table(summary_table(rows), to_stderr=False)
            else:
                sys.stdout.write(text)

    except json.JSONDecodeError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    except DetRCError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(e.exit_code)
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(3)


if __name__ == "__main__":
    main()
