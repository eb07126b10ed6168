"""Mackey-Glass series generation, z-score normalization and trajectory cuts.

The delay differential equation

    dx/dt = beta * theta * x(t - tau) / (theta**n + x(t - tau)**n) - gamma * x(t)

is integrated with a fixed-step RK4 scheme. The delayed value is read from a
ring buffer of past integration states and held constant within one step.

Usage:
    from detrc.mackey_glass import MGParams, integrate_mg, z_normalize

    series = integrate_mg(MGParams(tau=17.0), total_samples=5000, discard=1000)
    normed = z_normalize(series)
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Union

import numpy as np

from .errors import (
    CapacityError,
    DegenerateSeriesError,
    DivergenceError,
    ParameterError,
    ReportIOError,
)

logger = logging.getLogger(__name__)

DEFAULT_DISCARD = 1000
DEFAULT_TRAJECTORIES = 10
DEFAULT_PREDICTION_STEPS = 286

# Delays of the benchmark protocol; dynamics turn chaotic at tau=17
BENCHMARK_TAUS = (5.0, 10.0, 15.0, 17.0, 20.0, 25.0)


@dataclass(frozen=True)
class MGParams:
    """Parameters of the Mackey-Glass equation and its integrator."""

    beta_mg: float = 0.2
    theta: float = 1.0
    gamma: float = 0.1
    n_mg: int = 10
    tau: float = 17.0
    dt: float = 0.1
    sample_stride: int = 10
    history_init: float = 1.2

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ParameterError("dt", self.dt, "must be > 0")
        if not self.tau >= self.dt:
            raise ParameterError("tau", self.tau, f"must be >= dt ({self.dt})")
        if self.sample_stride < 1:
            raise ParameterError("sample_stride", self.sample_stride, "must be >= 1")
        if self.n_mg < 1:
            raise ParameterError("n_mg", self.n_mg, "must be a positive integer")

    @property
    def delay_steps(self) -> int:
        """Number of integration steps spanned by the delay."""
        return int(round(self.tau / self.dt))

    def with_tau(self, tau: float) -> "MGParams":
        return replace(self, tau=float(tau))

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MGParams":
        return cls(**data)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """An ordered sequence of scalar samples plus how it was produced.

    Attributes:
        values: Read-only float64 array of samples
        meta: Generating parameters, or "external" for loaded data
        normalized: Whether values are z-scored
        norm_stats: (mu, std) used for normalization, when normalized
    """

    values: np.ndarray
    meta: Union[MGParams, str] = "external"
    normalized: bool = False
    norm_stats: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.size == 0:
            raise ParameterError("values", "[]", "series must be non-empty")
        if not np.all(np.isfinite(values)):
            raise ParameterError("values", "non-finite", "all samples must be finite")
        if self.normalized:
            if self.norm_stats is None or not self.norm_stats[1] > 0:
                raise ParameterError(
                    "norm_stats", self.norm_stats, "normalized series need std > 0"
                )
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return int(self.values.size)

    def window(self, start: int, stop: int) -> "TimeSeries":
        """Contiguous sub-series sharing this series' metadata."""
        return TimeSeries(
            values=self.values[start:stop],
            meta=self.meta,
            normalized=self.normalized,
            norm_stats=self.norm_stats,
        )


@dataclass(frozen=True)
class TrajectorySet:
    """Train/test windows cut from one series.

    Each train window holds warmup + s_t samples and its test window of s_p
    samples follows immediately.
    """

    trajectories: list[tuple[TimeSeries, TimeSeries]]
    offsets: list[int]

    def __len__(self) -> int:
        return len(self.trajectories)


def _mg_rhs(x: float, x_tau: float, p: MGParams, theta_n: float) -> float:
    return p.beta_mg * p.theta * x_tau / (theta_n + x_tau**p.n_mg) - p.gamma * x


def integrate_mg(
    params: MGParams, total_samples: int, discard: int = DEFAULT_DISCARD
) -> TimeSeries:
    """Integrate the Mackey-Glass equation with RK4.

    Samples are emitted every `sample_stride` integration steps, starting with
    the initial state; the first `discard` samples are dropped as transient.

    Args:
        params: Equation and integrator parameters
        total_samples: Number of samples to return
        discard: Number of leading samples to drop

    Returns:
        TimeSeries with `total_samples` values

    Raises:
        ParameterError: total_samples < 1 or discard < 0
        DivergenceError: the state becomes non-finite
    """
    if total_samples < 1:
        raise ParameterError("total_samples", total_samples, "must be >= 1")
    if discard < 0:
        raise ParameterError("discard", discard, "must be >= 0")

    delay = max(params.delay_steps, 1)
    stride = params.sample_stride
    dt = params.dt
    half = 0.5 * dt
    theta_n = params.theta**params.n_mg
    n_emit = discard + total_samples

    # buffer[k % delay] holds x at step k - delay until it is overwritten
    buffer = [float(params.history_init)] * delay
    x = float(params.history_init)
    out = np.empty(total_samples, dtype=np.float64)

    step = 0
    for i in range(n_emit):
        if i >= discard:
            out[i - discard] = x
        if i == n_emit - 1:
            break
        for _ in range(stride):
            slot = step % delay
            x_tau = buffer[slot]
            buffer[slot] = x
            k1 = _mg_rhs(x, x_tau, params, theta_n)
            k2 = _mg_rhs(x + half * k1, x_tau, params, theta_n)
            k3 = _mg_rhs(x + half * k2, x_tau, params, theta_n)
            k4 = _mg_rhs(x + dt * k3, x_tau, params, theta_n)
            x = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step += 1
            if not math.isfinite(x):
                raise DivergenceError("Mackey-Glass integration", step)

    logger.debug(
        f"Integrated tau={params.tau} for {step} steps, emitted {total_samples} samples"
    )
    return TimeSeries(values=out, meta=params)


def z_normalize(series: TimeSeries) -> TimeSeries:
    """Z-score a series with its own mean and population standard deviation.

    Raises:
        ParameterError: fewer than 2 samples
        DegenerateSeriesError: standard deviation is zero
    """
    values = series.values
    if values.size < 2:
        raise ParameterError("series", values.size, "need at least 2 samples")
    mu = float(values.mean())
    std = float(values.std())
    if not std > np.finfo(np.float64).eps * max(1.0, abs(mu)):
        raise DegenerateSeriesError(f"Cannot normalize: std={std!r} (mean {mu!r})")
    return TimeSeries(
        values=(values - mu) / std,
        meta=series.meta,
        normalized=True,
        norm_stats=(mu, std),
    )


def generate_dataset(
    params: MGParams,
    length: int,
    discard: int = DEFAULT_DISCARD,
    normalize: bool = True,
) -> TimeSeries:
    """Integrate and (optionally) z-normalize over the full emitted series."""
    series = integrate_mg(params, length, discard)
    return z_normalize(series) if normalize else series


def make_trajectories(
    series: TimeSeries,
    count: int = DEFAULT_TRAJECTORIES,
    s_t: int = 1,
    s_p: int = DEFAULT_PREDICTION_STEPS,
    warmup: int = 0,
) -> TrajectorySet:
    """Cut `count` contiguous train/test windows with evenly spaced starts.

    The first start is 0 and the last start is the last admissible one, so
    windows never read past the end of the series.

    Raises:
        ParameterError: non-positive count/s_t/s_p or negative warmup
        CapacityError: the series cannot hold `count` distinct starts
    """
    if count < 1:
        raise ParameterError("count", count, "must be >= 1")
    if s_t < 1:
        raise ParameterError("s_t", s_t, "must be >= 1")
    if s_p < 1:
        raise ParameterError("s_p", s_p, "must be >= 1")
    if warmup < 0:
        raise ParameterError("warmup", warmup, "must be >= 0")

    window = warmup + s_t + s_p
    length = len(series)
    required = window + count - 1
    if length < required:
        raise CapacityError(length, required, f"{count} windows of {window} samples")

    span = length - window
    if count == 1:
        offsets = [0]
    else:
        offsets = [(i * span) // (count - 1) for i in range(count)]

    trajectories = []
    for off in offsets:
        split = off + warmup + s_t
        trajectories.append((series.window(off, split), series.window(split, off + window)))
    return TrajectorySet(trajectories=trajectories, offsets=offsets)


def format_series(series: TimeSeries) -> str:
    """Series file text: '#' + JSON header, then one value per line."""
    header = {
        "meta": series.meta.to_dict() if isinstance(series.meta, MGParams) else series.meta,
        "normalized": series.normalized,
        "norm_stats": list(series.norm_stats) if series.norm_stats else None,
        "length": len(series),
    }
    lines = ["#" + json.dumps(header, sort_keys=True)]
    lines.extend(f"{v:.17g}" for v in series.values)
    return "\n".join(lines) + "\n"


def save_series(series: TimeSeries, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_series(series))
    except OSError as e:
        raise ReportIOError(path, e) from e


def load_series(path: Union[str, Path]) -> TimeSeries:
    """Read a series file written by save_series (header line optional)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ReportIOError(path, e) from e

    meta: Union[MGParams, str] = "external"
    normalized = False
    norm_stats = None
    values = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            try:
                header = json.loads(line[1:])
            except json.JSONDecodeError:
                # Plain comment
                continue
            if isinstance(header.get("meta"), dict):
                meta = MGParams.from_dict(header["meta"])
            normalized = bool(header.get("normalized", False))
            if header.get("norm_stats"):
                norm_stats = tuple(header["norm_stats"])
            continue
        values.append(float(line))

    return TimeSeries(
        values=np.array(values, dtype=np.float64),
        meta=meta,
        normalized=normalized,
        norm_stats=norm_stats,
    )
