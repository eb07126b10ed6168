"""Experiment orchestration: multi-trajectory runs, aggregation and timing.

One experiment evaluates every (tau, trajectory, seed) combination:

    series      = generate_dataset(tau)          # once per tau, z-scored
    train, test = make_trajectories(series)[j]
    states      = model.collect(train, s_t)
    w_out       = fit_tikhonov(states, targets, beta)
    forecast    = forecast_closed_loop(model, w_out, train, s_p, test)

Runs are independent and execute in a process pool; records are sorted
afterwards so report order does not depend on scheduling.
"""

from __future__ import annotations

import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from functools import lru_cache
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .config import ExperimentConfig, config_hash
from .errors import ConfigError, DetRCError, NumericError, ParameterError
from .mackey_glass import MGParams, TimeSeries, generate_dataset, make_trajectories
from .models import (
    ESNConfig,
    LogisticExpansion,
    ModelConfig,
    TCRCConfig,
    Variant,
    build_model,
    model_config_from_dict,
    parse_variant,
    state_size,
    with_seed,
)
from .readout import ForecastResult, fit_tikhonov, forecast_closed_loop, training_targets
from .report import DETERMINISTIC_SEED, BenchmarkRow, ResultRecord, Seed, SummaryRow

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int, int], None]


@dataclass(frozen=True)
class RunTask:
    """Inputs of one (tau, trajectory, seed) run, picklable for worker processes."""

    model: ModelConfig
    tau: float
    trajectory: int
    seed: Seed
    train: np.ndarray
    test: np.ndarray
    s_t: int
    config_hash: str


def resolve_workers(threads: Optional[int] = None) -> int:
    """Worker count: explicit value, else DETRC_MAX_WORKERS, else the CPU count."""
    if threads is not None:
        if threads < 1:
            raise ParameterError("threads", threads, "must be >= 1")
        return threads
    env = os.environ.get("DETRC_MAX_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            logger.warning(f"Ignoring invalid DETRC_MAX_WORKERS={env!r}")
    return os.cpu_count() or 4


def _get_progress_console():
    """Get rich Console if available and TTY, else None."""
    if not sys.stdout.isatty():
        return None
    if os.environ.get("NO_PROGRESS") or os.environ.get("CI"):
        return None
    try:
        from rich.console import Console
        return Console()
    except ImportError:
        return None


@lru_cache(maxsize=16)
def _dataset(params: MGParams, length: int, discard: int) -> TimeSeries:
    series = generate_dataset(params, length, discard, normalize=True)
    logger.info(f"Generated tau={params.tau:g} series of {length} samples")
    return series


def evaluate_trajectory(
    model_cfg: ModelConfig, train: np.ndarray, test: np.ndarray, s_t: int
) -> ForecastResult:
    """Train on one window and forecast its test window closed-loop.

    Args:
        model_cfg: Model hyper-parameters (seed already applied)
        train: warmup + s_t samples; the last s_t are the readout targets
        test: Samples following train, used only for scoring
        s_t: Number of training columns
    """
    model = build_model(model_cfg)
    states = model.collect(train, s_t)
    weights = fit_tikhonov(states, training_targets(train, s_t), model_cfg.beta)
    return forecast_closed_loop(model, weights, train, len(test), test)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _run_task(task: RunTask) -> ResultRecord:
    """Evaluate one task; failures become flagged records instead of exceptions."""
    start = time.perf_counter()
    mse = math.nan
    divergent = False
    error = None
    try:
        result = evaluate_trajectory(task.model, task.train, task.test, task.s_t)
        mse = result.mse
        divergent = result.diverged
    except NumericError as e:
        divergent = True
        error = str(e)
    except ConfigError as e:
        error = str(e)
    elapsed = time.perf_counter() - start

    return ResultRecord(
        variant=task.model.variant.value,
        activation=task.model.activation.name,
        tau=task.tau,
        trajectory=task.trajectory,
        seed=task.seed,
        mse=mse,
        wall_clock_s=elapsed,
        divergent=divergent,
        config_hash=task.config_hash,
        timestamp=_now(),
        error=error,
    )


def _run_all(
    tasks: Sequence[RunTask],
    max_workers: int,
    progress_callback: Optional[ProgressCallback] = None,
) -> list[ResultRecord]:
    records: list[ResultRecord] = []

    def _done(record: ResultRecord) -> None:
        records.append(record)
        if progress_callback:
            progress_callback(len(records), len(tasks))

    if len(tasks) > 1 and max_workers > 1:
        try:
            with ProcessPoolExecutor(max_workers=max_workers) as executor:
                futures = [executor.submit(_run_task, task) for task in tasks]
                for future in as_completed(futures):
                    _done(future.result())
            return records
        except Exception as e:
            logger.warning(f"Parallel execution failed: {e}, falling back to sequential")
            records.clear()

    for task in tasks:
        _done(_run_task(task))
    return records


def _failed_records(
    cfg: ExperimentConfig, tau: float, seeds: list[Seed], chash: str, error: DetRCError
) -> list[ResultRecord]:
    return [
        ResultRecord(
            variant=cfg.model.variant.value,
            activation=cfg.model.activation.name,
            tau=float(tau),
            trajectory=j,
            seed=seed,
            mse=math.nan,
            divergent=isinstance(error, NumericError),
            config_hash=chash,
            timestamp=_now(),
            error=str(error),
        )
        for j in range(cfg.evaluated_trajectories)
        for seed in seeds
    ]


def run_experiment(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
    show_progress: bool = True,
) -> list[ResultRecord]:
    """Evaluate every (tau, trajectory, seed) combination of an experiment.

    Deterministic variants run once per trajectory with seed "deterministic".
    Dataset and per-run failures produce flagged records; the run continues.

    Args:
        cfg: Experiment configuration
        workers: Process count (default from resolve_workers())
        show_progress: Show a rich progress bar when attached to a terminal

    Returns:
        Records sorted by (variant, tau, trajectory, seed)
    """
    chash = config_hash(cfg)
    seeds: list[Seed] = list(cfg.seeds) if cfg.is_random else [DETERMINISTIC_SEED]
    records: list[ResultRecord] = []
    tasks: list[RunTask] = []

    for tau in cfg.dataset.taus:
        params = cfg.dataset.params_for(tau)
        try:
            series = _dataset(params, cfg.series_length, cfg.dataset.discard)
            trajectories = make_trajectories(
                series, cfg.trajectories, cfg.s_t, cfg.s_p, cfg.warmup
            )
        except DetRCError as e:
            logger.warning(f"tau={tau:g}: {e}")
            records.extend(_failed_records(cfg, tau, seeds, chash, e))
            continue

        for j in range(cfg.evaluated_trajectories):
            train, test = trajectories.trajectories[j]
            for seed in seeds:
                model = cfg.model if seed == DETERMINISTIC_SEED else with_seed(cfg.model, seed)
                tasks.append(
                    RunTask(
                        model=model,
                        tau=float(tau),
                        trajectory=j,
                        seed=seed,
                        train=np.asarray(train.values),
                        test=np.asarray(test.values),
                        s_t=cfg.s_t,
                        config_hash=chash,
                    )
                )

    max_workers = resolve_workers(workers)
    console = _get_progress_console() if show_progress else None
    if console and tasks:
        from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

        with Progress(
            SpinnerColumn(),
            TextColumn("[bold green]{task.description}"),
            BarColumn(),
            TaskProgressColumn(),
            console=console,
        ) as progress:
            bar = progress.add_task(f"Running {cfg.model.variant.value}...", total=len(tasks))
            records.extend(
                _run_all(tasks, max_workers, lambda done, _: progress.update(bar, completed=done))
            )
    else:
        records.extend(_run_all(tasks, max_workers))

    records.sort(key=lambda r: r.sort_key)
    failed = sum(1 for r in records if not r.ok)
    logger.info(f"Completed {len(records)} runs ({failed} divergent or failed)")
    return records


def aggregate(records: Sequence[ResultRecord]) -> list[SummaryRow]:
    """Group records by (variant, activation, tau) and summarize.

    Divergent and failed records are counted but excluded from the MSE
    statistics; std is the population standard deviation.

    Raises:
        ParameterError: no records
    """
    if not records:
        raise ParameterError("records", "[]", "need at least one record to aggregate")

    groups: dict[tuple[str, str, float], list[ResultRecord]] = {}
    for rec in records:
        groups.setdefault((rec.variant, rec.activation, rec.tau), []).append(rec)

    rows = []
    for (variant, activation, tau), group in sorted(groups.items()):
        values = np.array([r.mse for r in group if r.ok], dtype=np.float64)
        times = np.array(
            [r.wall_clock_s for r in group if math.isfinite(r.wall_clock_s)], dtype=np.float64
        )
        rows.append(
            SummaryRow(
                variant=variant,
                activation=activation,
                tau=tau,
                mean_mse=float(values.mean()) if values.size else math.nan,
                std_mse=float(values.std()) if values.size else math.nan,
                mean_wall_clock_s=float(times.mean()) if times.size else math.nan,
                count=len(group),
                divergent_count=sum(1 for r in group if r.divergent),
                error_count=sum(1 for r in group if r.error is not None and not r.divergent),
            )
        )
    return rows


# =============================================================================
# Benchmark
# =============================================================================


def _with_n_expand(cfg: TCRCConfig, n: int) -> TCRCConfig:
    expansion = cfg.expansion
    if isinstance(expansion, LogisticExpansion):
        expansion = LogisticExpansion(replace(expansion.params, n_expand=n))
    return replace(cfg, n_expand=n, expansion=expansion)


def match_state_size(
    variant: Union[str, Variant], target: int, base: Optional[ModelConfig] = None
) -> ModelConfig:
    """Configuration of `variant` whose state size is close to `target`.

    esn sets n_res = target. Plain tcrc picks delta_hat for the configured
    layer count; expanded variants keep the base delta_hat and layers and
    choose the expansion factor n.
    """
    variant = parse_variant(variant) if not isinstance(variant, Variant) else variant
    if target < 1:
        raise ParameterError("target", target, "must be >= 1")
    if base is None or base.variant is not variant:
        base = model_config_from_dict({"variant": variant.value})

    if isinstance(base, ESNConfig):
        return replace(base, n_res=int(target))

    if variant is Variant.TCRC:
        layers = base.layers
        delta_hat = int(round((target + layers * (layers - 1) / 2) / layers))
        return replace(base, delta_hat=max(delta_hat, layers))

    n = max(1, int(round(target / base.base_size)))
    return _with_n_expand(base, n)


def benchmark(
    cfg: ExperimentConfig,
    repeats: int,
    variants: Optional[Sequence[Union[str, Variant]]] = None,
    size: Optional[int] = None,
) -> list[BenchmarkRow]:
    """Median wall-clock time of train + forecast per variant at matched state size.

    Uses the first tau and the first trajectory of the experiment.

    Raises:
        ParameterError: repeats < 1
    """
    if repeats < 1:
        raise ParameterError("repeats", repeats, "must be >= 1")
    target = size if size is not None else state_size(cfg.model)
    chosen = [parse_variant(v) for v in variants] if variants else list(Variant)

    matched = [(v, match_state_size(v, target, cfg.model)) for v in chosen]
    # Every variant sees the same window, long enough for the deepest history
    warmup = max(
        [cfg.warmup]
        + [m.washout + 1 if isinstance(m, ESNConfig) else m.delta_hat + 1 for _, m in matched]
    )
    length = max(cfg.series_length, warmup + cfg.s_t + cfg.s_p)
    params = cfg.dataset.params_for(cfg.dataset.taus[0])
    series = _dataset(params, length, cfg.dataset.discard)
    train, test = make_trajectories(series, 1, cfg.s_t, cfg.s_p, warmup).trajectories[0]

    rows = []
    for variant, model_cfg in matched:
        timings = []
        for _ in range(repeats):
            start = time.perf_counter()
            evaluate_trajectory(model_cfg, train.values, test.values, cfg.s_t)
            timings.append(time.perf_counter() - start)
        median = float(np.median(timings))
        logger.info(f"{variant.value}: size {state_size(model_cfg)}, median {median:.4f}s")
        rows.append(
            BenchmarkRow(
                variant=variant.value,
                state_size=state_size(model_cfg),
                repeats=repeats,
                median_s=median,
                timings=timings,
            )
        )
    return rows
