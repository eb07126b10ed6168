"""Hyper-parameter search over model configurations.

A SearchSpace maps parameter names (model keys, or "s_t") to ranges. A
strategy proposes parameter sets; each is evaluated with run_experiment on
the first `trial_trajectories` windows and scored by the mean MSE over its
records. Trials with divergent or failed records are not viable.

Strategies:
- random: independent draws under the search seed (default)
- grid:   cartesian product of evenly spaced points, truncated to the budget
"""

from __future__ import annotations

import itertools
import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Iterator, Optional, Protocol, Sequence, Union

import numpy as np

from .config import ExperimentConfig
from .errors import ConfigError, NoViableConfigError, ParameterError, ReportIOError
from .harness import run_experiment
from .models import (
    Variant,
    model_config_from_dict,
    model_config_to_dict,
    parse_variant,
)
from .report import TrialLog

logger = logging.getLogger(__name__)

EXPERIMENT_PARAMS = {"s_t"}
DEFAULT_BUDGET = 50
DEFAULT_TRIAL_TRAJECTORIES = 3
DEFAULT_GRID_POINTS = 5


@dataclass(frozen=True)
class FloatRange:
    low: float
    high: float
    log: bool = False

    def __post_init__(self) -> None:
        if not self.low <= self.high:
            raise ParameterError("range", (self.low, self.high), "low must be <= high")
        if self.log and not self.low > 0:
            raise ParameterError("range", (self.low, self.high), "log ranges need low > 0")

    def sample(self, rng: np.random.Generator) -> float:
        if self.log:
            return float(math.exp(rng.uniform(math.log(self.low), math.log(self.high))))
        return float(rng.uniform(self.low, self.high))

    def grid(self, points: int) -> list[float]:
        if self.low == self.high:
            return [float(self.low)]
        if self.log:
            return [float(v) for v in np.geomspace(self.low, self.high, points)]
        return [float(v) for v in np.linspace(self.low, self.high, points)]


@dataclass(frozen=True)
class IntRange:
    low: int
    high: int

    def __post_init__(self) -> None:
        if not self.low <= self.high:
            raise ParameterError("range", (self.low, self.high), "low must be <= high")

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.integers(self.low, self.high + 1))

    def grid(self, points: int) -> list[int]:
        values = np.rint(np.linspace(self.low, self.high, points)).astype(int)
        return sorted({int(v) for v in values})


@dataclass(frozen=True)
class Choice:
    values: tuple[Any, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise ParameterError("values", [], "choice needs at least one value")

    def sample(self, rng: np.random.Generator) -> Any:
        return self.values[int(rng.integers(len(self.values)))]

    def grid(self, points: int) -> list[Any]:
        return list(self.values)


ParamRange = Union[FloatRange, IntRange, Choice]


@dataclass(frozen=True)
class SearchSpace:
    """Ranges per hyper-parameter plus the search budget and seed."""

    params: dict[str, ParamRange]
    budget: int = DEFAULT_BUDGET
    seed: int = 0
    strategy: str = "random"
    trial_trajectories: int = DEFAULT_TRIAL_TRAJECTORIES
    grid_points: int = DEFAULT_GRID_POINTS

    def __post_init__(self) -> None:
        if self.budget < 1:
            raise ParameterError("budget", self.budget, "must be >= 1")
        if self.trial_trajectories < 1:
            raise ParameterError("trial_trajectories", self.trial_trajectories, "must be >= 1")
        if self.grid_points < 1:
            raise ParameterError("grid_points", self.grid_points, "must be >= 1")
        if self.strategy not in STRATEGIES:
            raise ConfigError(
                f"Unknown search strategy {self.strategy!r}; "
                f"expected one of {', '.join(STRATEGIES)}"
            )

    @property
    def names(self) -> list[str]:
        return sorted(self.params)


class SearchStrategy(Protocol):
    def propose(self, space: SearchSpace) -> Iterator[dict[str, Any]]:
        ...


class RandomSearch:
    """Independent uniform (or log-uniform) draws."""

    def __init__(self, seed: int):
        self.seed = seed

    def propose(self, space: SearchSpace) -> Iterator[dict[str, Any]]:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed)))
        for _ in range(space.budget):
            yield {name: space.params[name].sample(rng) for name in space.names}


class GridSearch:
    """Cartesian grid in sorted parameter order."""

    def __init__(self, points: int):
        self.points = points

    def propose(self, space: SearchSpace) -> Iterator[dict[str, Any]]:
        axes = [space.params[name].grid(self.points) for name in space.names]
        for combo in itertools.islice(itertools.product(*axes), space.budget):
            yield dict(zip(space.names, combo))


STRATEGIES = {
    "random": lambda space: RandomSearch(space.seed),
    "grid": lambda space: GridSearch(space.grid_points),
}


@dataclass
class Trial:
    """One evaluated parameter set."""

    index: int
    params: dict[str, Any]
    mean_mse: float = math.nan
    viable: bool = False
    records: int = 0
    failed_records: int = 0
    error: Optional[str] = None
    model: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "index": self.index,
            "params": self.params,
            "mean_mse": self.mean_mse if math.isfinite(self.mean_mse) else None,
            "viable": self.viable,
            "records": self.records,
            "failed_records": self.failed_records,
            "error": self.error,
            "model": self.model,
        }


@dataclass
class SearchResult:
    best_config: ExperimentConfig
    best_trial: Trial
    trials: list[Trial]


def _trial_config(
    template: ExperimentConfig, params: dict[str, Any], trial_trajectories: int
) -> ExperimentConfig:
    model_data = model_config_to_dict(template.model)
    model_data.update({k: v for k, v in params.items() if k not in EXPERIMENT_PARAMS})
    updates: dict[str, Any] = {
        "model": model_config_from_dict(model_data),
        "trajectory_subset": min(trial_trajectories, template.trajectories),
    }
    if "s_t" in params:
        updates["s_t"] = int(params["s_t"])
    return replace(template, **updates)


def search(
    space: SearchSpace,
    cfg_template: ExperimentConfig,
    log: Union[TrialLog, str, Path, None] = None,
    workers: Optional[int] = None,
) -> SearchResult:
    """Search the space and return the configuration with the lowest mean MSE.

    Ties go to the earlier trial. The returned configuration has no
    trajectory subset, so a final run covers every trajectory.

    Args:
        space: Parameter ranges, budget, seed and strategy
        cfg_template: Experiment whose model the sampled values override
        log: TrialLog (or JSONL path) receiving every trial as it finishes
        workers: Process count forwarded to run_experiment

    Raises:
        ConfigError: a parameter name the template's variant does not have
        NoViableConfigError: every trial diverged or failed
    """
    allowed = set(model_config_to_dict(cfg_template.model)) - {"variant"} | EXPERIMENT_PARAMS
    unknown = sorted(set(space.params) - allowed)
    if unknown:
        raise ConfigError(
            f"Search parameters not in {cfg_template.model.variant.value}: {', '.join(unknown)}"
        )
    if log is not None and not isinstance(log, TrialLog):
        log = TrialLog(log)

    strategy: SearchStrategy = STRATEGIES[space.strategy](space)
    trials: list[Trial] = []
    best: Optional[Trial] = None
    best_cfg: Optional[ExperimentConfig] = None

    for index, params in enumerate(strategy.propose(space)):
        trial = Trial(index=index, params=params)
        try:
            cfg = _trial_config(cfg_template, params, space.trial_trajectories)
            trial.model = model_config_to_dict(cfg.model)
            records = run_experiment(cfg, workers=workers, show_progress=False)
            trial.records = len(records)
            trial.failed_records = sum(1 for r in records if not r.ok)
            trial.viable = trial.failed_records == 0
            if trial.viable:
                trial.mean_mse = float(np.mean([r.mse for r in records]))
        except ConfigError as e:
            trial.error = str(e)

        trials.append(trial)
        if log is not None:
            log.append(trial.to_dict())
        logger.info(
            f"Trial {index}: mse={trial.mean_mse:.4e} viable={trial.viable}"
            + (f" ({trial.error})" if trial.error else "")
        )

        if trial.viable and (best is None or trial.mean_mse < best.mean_mse):
            best = trial
            best_cfg = replace(cfg, trajectory_subset=None)

    if best is None or best_cfg is None:
        raise NoViableConfigError(trials)
    logger.info(f"Best trial {best.index}: mse={best.mean_mse:.4e}")
    return SearchResult(best_config=best_cfg, best_trial=best, trials=trials)


def default_search_space(
    variant: Union[str, Variant], budget: int = DEFAULT_BUDGET, seed: int = 0
) -> SearchSpace:
    """Search ranges covering the hyper-parameter set of each variant."""
    variant = parse_variant(variant) if not isinstance(variant, Variant) else variant
    common: dict[str, ParamRange] = {
        "s_t": Choice((500, 1000, 2000)),
        "beta": FloatRange(1e-10, 1e-2, log=True),
    }
    if variant is Variant.ESN:
        params = {**common, "rho": FloatRange(0.1, 1.5), "n_res": IntRange(50, 500)}
    else:
        params = {**common, "delta_hat": IntRange(2, 40), "layers": IntRange(1, 5)}
        if variant is Variant.TCRC_ELM:
            params.update(n_expand=IntRange(1, 20), sigma_hat=FloatRange(0.01, 2.0, log=True))
        elif variant is Variant.TCRC_CM:
            params.update(
                n_expand=IntRange(1, 20),
                p=FloatRange(0.05, 1.0),
                q=FloatRange(0.5, 4.0),
                k_cheb=FloatRange(0.5, 5.0),
            )
        elif variant is Variant.TCRC_LM:
            params.update(
                n_expand=IntRange(1, 20),
                r=FloatRange(3.0, 4.0),
                a=FloatRange(0.05, 1.0),
                b=FloatRange(1.0, 4.0),
            )
    return SearchSpace(params=params, budget=budget, seed=seed)


def _parse_range(name: str, entry: dict[str, Any]) -> ParamRange:
    kind = entry.get("type")
    try:
        if kind == "float":
            return FloatRange(
                float(entry["low"]), float(entry["high"]), bool(entry.get("log", False))
            )
        if kind == "int":
            return IntRange(int(entry["low"]), int(entry["high"]))
        if kind == "choice":
            return Choice(tuple(entry["values"]))
    except KeyError as e:
        raise ConfigError(f"Search parameter {name!r} is missing {e}") from e
    raise ConfigError(f"Search parameter {name!r} has unknown type {kind!r}")


def search_space_from_dict(data: dict[str, Any]) -> SearchSpace:
    allowed = {"strategy", "budget", "seed", "trial_trajectories", "grid_points", "params"}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"Unknown search space keys: {', '.join(unknown)}")
    params = data.get("params")
    if not isinstance(params, dict) or not params:
        raise ConfigError("Search space needs a non-empty 'params' object")
    return SearchSpace(
        params={name: _parse_range(name, entry) for name, entry in params.items()},
        budget=int(data.get("budget", DEFAULT_BUDGET)),
        seed=int(data.get("seed", 0)),
        strategy=str(data.get("strategy", "random")),
        trial_trajectories=int(data.get("trial_trajectories", DEFAULT_TRIAL_TRAJECTORIES)),
        grid_points=int(data.get("grid_points", DEFAULT_GRID_POINTS)),
    )


def load_search_space(path: Union[str, Path]) -> SearchSpace:
    """Read a search space from a JSON file."""
    path = Path(path)
    try:
        with open(path) as f:
            data = json.load(f)
    except OSError as e:
        raise ReportIOError(path, e) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}") from e
    return search_space_from_dict(data)


def summarize_trials(trials: Sequence[Trial]) -> dict[str, Any]:
    viable = [t for t in trials if t.viable]
    return {
        "trials": len(trials),
        "viable": len(viable),
        "best_mse": min((t.mean_mse for t in viable), default=None),
    }
