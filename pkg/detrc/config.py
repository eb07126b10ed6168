"""
Experiment configuration.

Provides:
- DatasetConfig / ExperimentConfig dataclasses
- experiment_config_from_dict() / ExperimentConfig.to_dict() for the JSON schema
- load_experiment_config() to read a JSON document from disk
- config_hash() to identify a configuration reproducibly

Unknown keys are rejected; missing keys take the defaults below.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

from .errors import ConfigError, ParameterError, ReportIOError
from .mackey_glass import (
    DEFAULT_DISCARD,
    DEFAULT_PREDICTION_STEPS,
    DEFAULT_TRAJECTORIES,
    MGParams,
)
from .models import (
    ESNConfig,
    ModelConfig,
    RANDOM_VARIANTS,
    TCRCConfig,
    model_config_from_dict,
    model_config_to_dict,
)

DEFAULT_TRAINING_STEPS = 2000
DEFAULT_WARMUP = 128
DEFAULT_SEEDS = tuple(range(15))

_DATASET_KEYS = {
    "taus", "beta_mg", "theta", "gamma", "n_mg", "dt", "sample_stride",
    "history_init", "discard", "series_length",
}
_EXPERIMENT_KEYS = {
    "dataset", "trajectories", "trajectory_subset", "s_t", "s_p", "warmup",
    "model", "seeds", "output",
}


@dataclass(frozen=True)
class DatasetConfig:
    """Mackey-Glass parameters shared by every tau, plus the tau list."""

    taus: tuple[float, ...] = (17.0,)
    base: MGParams = field(default_factory=MGParams)
    discard: int = DEFAULT_DISCARD
    series_length: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.taus:
            raise ParameterError("taus", list(self.taus), "at least one delay is required")
        if self.discard < 0:
            raise ParameterError("discard", self.discard, "must be >= 0")
        if self.series_length is not None and self.series_length < 2:
            raise ParameterError("series_length", self.series_length, "must be >= 2")
        for tau in self.taus:
            # Validates tau >= dt
            self.base.with_tau(tau)

    def params_for(self, tau: float) -> MGParams:
        return self.base.with_tau(tau)

    def to_dict(self) -> dict[str, Any]:
        base = self.base.to_dict()
        base.pop("tau")
        return {
            "taus": [float(t) for t in self.taus],
            **base,
            "discard": self.discard,
            "series_length": self.series_length,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DatasetConfig":
        unknown = sorted(set(data) - _DATASET_KEYS)
        if unknown:
            raise ConfigError(f"Unknown dataset keys: {', '.join(unknown)}")
        taus = tuple(float(t) for t in data.get("taus", [17.0]))
        mg_keys = _DATASET_KEYS - {"taus", "discard", "series_length"}
        mg = {k: data[k] for k in mg_keys if k in data}
        base = MGParams(tau=taus[0] if taus else 17.0, **mg)
        length = data.get("series_length")
        return cls(
            taus=taus,
            base=base,
            discard=int(data.get("discard", DEFAULT_DISCARD)),
            series_length=int(length) if length is not None else None,
        )


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to run one experiment.

    Attributes:
        dataset: Series generation settings and the tau list
        model: Model hyper-parameters (variant discriminated)
        trajectories: Number of train/test windows per series
        trajectory_subset: Evaluate only the first k windows (search trials)
        s_t: Training steps (readout columns)
        s_p: Forecast horizon
        warmup: History preceding the training targets
        seeds: Seeds for random variants; unused by deterministic ones
        output: Default report path
    """

    model: ModelConfig
    dataset: DatasetConfig = field(default_factory=DatasetConfig)
    trajectories: int = DEFAULT_TRAJECTORIES
    trajectory_subset: Optional[int] = None
    s_t: int = DEFAULT_TRAINING_STEPS
    s_p: int = DEFAULT_PREDICTION_STEPS
    warmup: int = DEFAULT_WARMUP
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.trajectories < 1:
            raise ParameterError("trajectories", self.trajectories, "must be >= 1")
        if self.trajectory_subset is not None and not (
            1 <= self.trajectory_subset <= self.trajectories
        ):
            raise ParameterError(
                "trajectory_subset", self.trajectory_subset, f"must lie in [1, {self.trajectories}]"
            )
        if self.s_t < 1:
            raise ParameterError("s_t", self.s_t, "must be >= 1")
        if self.s_p < 1:
            raise ParameterError("s_p", self.s_p, "must be >= 1")
        if self.warmup < 0:
            raise ParameterError("warmup", self.warmup, "must be >= 0")
        needed = self.min_warmup
        if self.warmup < needed:
            raise ParameterError(
                "warmup", self.warmup, f"must be >= {needed} to form the first training state"
            )
        if self.is_random and not self.seeds:
            raise ParameterError("seeds", [], f"{self.model.variant.value} needs at least one seed")
        if any(s < 0 for s in self.seeds):
            raise ParameterError("seeds", list(self.seeds), "seeds must be >= 0")

    @property
    def min_warmup(self) -> int:
        if isinstance(self.model, ESNConfig):
            return self.model.washout + 1
        return self.model.delta_hat + 1

    @property
    def is_random(self) -> bool:
        return self.model.variant in RANDOM_VARIANTS

    @property
    def window(self) -> int:
        return self.warmup + self.s_t + self.s_p

    @property
    def series_length(self) -> int:
        if self.dataset.series_length is not None:
            return self.dataset.series_length
        return self.trajectories * self.window

    @property
    def evaluated_trajectories(self) -> int:
        return self.trajectory_subset or self.trajectories

    def to_dict(self) -> dict[str, Any]:
        return {
            "dataset": self.dataset.to_dict(),
            "trajectories": self.trajectories,
            "trajectory_subset": self.trajectory_subset,
            "s_t": self.s_t,
            "s_p": self.s_p,
            "warmup": self.warmup,
            "model": model_config_to_dict(self.model),
            "seeds": list(self.seeds),
            "output": self.output,
        }


def experiment_config_from_dict(data: dict[str, Any]) -> ExperimentConfig:
    """Build an ExperimentConfig from its JSON form.

    Raises:
        ConfigError: unknown keys, missing model, or invalid values
    """
    if not isinstance(data, dict):
        raise ConfigError("Experiment configuration must be a JSON object")
    unknown = sorted(set(data) - _EXPERIMENT_KEYS)
    if unknown:
        raise ConfigError(f"Unknown experiment keys: {', '.join(unknown)}")
    if "model" not in data:
        raise ConfigError("Experiment configuration needs a 'model' section")

    try:
        subset = data.get("trajectory_subset")
        return ExperimentConfig(
            model=model_config_from_dict(data["model"]),
            dataset=DatasetConfig.from_dict(data.get("dataset", {})),
            trajectories=int(data.get("trajectories", DEFAULT_TRAJECTORIES)),
            trajectory_subset=int(subset) if subset is not None else None,
            s_t=int(data.get("s_t", DEFAULT_TRAINING_STEPS)),
            s_p=int(data.get("s_p", DEFAULT_PREDICTION_STEPS)),
            warmup=int(data.get("warmup", DEFAULT_WARMUP)),
            seeds=tuple(int(s) for s in data.get("seeds", DEFAULT_SEEDS)),
            output=data.get("output"),
        )
    except (TypeError, ValueError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(f"Invalid experiment configuration: {e}") from e


def load_experiment_config(path: Union[str, Path]) -> ExperimentConfig:
    """
    Load an experiment configuration from a JSON file.

    Raises:
        ReportIOError: the file cannot be read
        ConfigError: invalid JSON or schema violations
    """
    path = Path(path)
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except OSError as e:
        raise ReportIOError(path, e) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid JSON in {path}: {e}") from e
    return experiment_config_from_dict(data)


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: Union[ExperimentConfig, TCRCConfig, ESNConfig]) -> str:
    """First 16 hex digits of the SHA-256 of the canonical JSON form."""
    if isinstance(cfg, ExperimentConfig):
        data = cfg.to_dict()
        data.pop("output", None)
    else:
        data = model_config_to_dict(cfg)
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()[:16]
