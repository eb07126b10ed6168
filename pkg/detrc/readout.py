"""Tikhonov-regularized linear readout and closed-loop forecasting.

The readout solves W_out = Y S^T (S S^T + beta I)^+ for a state matrix S
(one column per training step) and one-step-ahead targets Y.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

import numpy as np
import scipy.linalg as la
from numpy.typing import ArrayLike

from .errors import ConfigError, NumericError, ParameterError, ReportIOError, ShapeError
from .models import Model, StateMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ReadoutWeights:
    """Trained output matrix (n_out x dim) and the beta it was fitted with."""

    w_out: np.ndarray
    beta: float

    def __post_init__(self) -> None:
        w = np.array(self.w_out, dtype=np.float64)
        if w.ndim == 1:
            w = w[None, :]
        if w.ndim != 2 or 0 in w.shape:
            raise ShapeError("Readout weights must be a non-empty matrix", "2-D", w.shape)
        if not np.all(np.isfinite(w)):
            raise NumericError("Readout weights contain non-finite values")
        if self.beta < 0:
            raise ParameterError("beta", self.beta, "must be >= 0")
        w.flags.writeable = False
        object.__setattr__(self, "w_out", w)

    @property
    def dim(self) -> int:
        return int(self.w_out.shape[1])

    @property
    def n_out(self) -> int:
        return int(self.w_out.shape[0])

    def to_dict(self) -> dict[str, Any]:
        return {
            "dim": self.dim,
            "n_out": self.n_out,
            "beta": self.beta,
            "values": self.w_out.reshape(-1).tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ReadoutWeights":
        try:
            dim = int(data["dim"])
            n_out = int(data.get("n_out", 1))
            values = np.array(data["values"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Malformed readout weights: {e}") from e
        if values.size != dim * n_out:
            raise ShapeError("Readout value count mismatch", dim * n_out, values.size)
        return cls(w_out=values.reshape(n_out, dim), beta=float(data["beta"]))


@dataclass(frozen=True, eq=False)
class ForecastResult:
    """Closed-loop predictions against their targets.

    When the forecast diverged, predictions after the last finite value
    (valid_steps of them are genuine) are padded with that value.
    """

    predictions: np.ndarray
    targets: np.ndarray
    mse: float
    diverged: bool = False
    valid_steps: int = -1

    def __post_init__(self) -> None:
        if len(self.predictions) != len(self.targets):
            raise ShapeError(
                "Predictions and targets differ in length", len(self.targets), len(self.predictions)
            )
        if self.valid_steps < 0:
            object.__setattr__(self, "valid_steps", len(self.predictions))


def _as_matrix(s: Union[StateMatrix, ArrayLike]) -> np.ndarray:
    if isinstance(s, StateMatrix):
        return s.values
    arr = np.asarray(s, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ShapeError("State matrix must be 2-D", "2-D", arr.shape)
    return arr


def fit_tikhonov(
    s: Union[StateMatrix, ArrayLike], y: ArrayLike, beta: float
) -> ReadoutWeights:
    """Fit W_out = Y S^T (S S^T + beta I)^+.

    beta > 0 uses a Cholesky-backed symmetric solve, falling back to the
    symmetric pseudoinverse if the factorization fails. beta = 0 is the plain
    pseudoinverse, computed from the SVD of S so rank-deficient states give
    the minimum-norm solution.

    Args:
        s: States, dim x S_T
        y: Targets, n_out x S_T (a 1-D array is one output row)
        beta: Ridge coefficient, >= 0

    Returns:
        ReadoutWeights with w_out of shape n_out x dim

    Raises:
        ShapeError: column counts differ
        ParameterError: beta < 0
        NumericError: non-finite inputs
    """
    S = _as_matrix(s)
    Y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    if Y.shape[1] != S.shape[1]:
        raise ShapeError("Target count must equal state steps", S.shape[1], Y.shape[1])
    if beta < 0:
        raise ParameterError("beta", beta, "must be >= 0")
    if not (np.all(np.isfinite(S)) and np.all(np.isfinite(Y))):
        raise NumericError("Non-finite values in readout training data")

    dim = S.shape[0]
    w_t = None
    if beta > 0:
        gram = S @ S.T + beta * np.eye(dim)
        rhs = (Y @ S.T).T
        try:
            w_t = la.solve(gram, rhs, assume_a="pos")
            logger.debug(f"Readout solved by Cholesky (dim={dim}, beta={beta})")
        except la.LinAlgError as e:
            logger.warning(f"Readout solve failed ({e}), using pseudoinverse")
            w_t = la.pinvh(gram) @ rhs
    else:
        # Minimum-norm least squares through the SVD of S; Y S^T (S S^T)^+ = Y S^+
        w_t = la.lstsq(S.T, Y.T)[0]
        logger.debug(f"Readout solved by SVD pseudoinverse (dim={dim}, beta=0)")

    if not np.all(np.isfinite(w_t)):
        raise NumericError("Readout solve produced non-finite weights")
    return ReadoutWeights(w_out=w_t.T, beta=float(beta))


def predict_step(w: ReadoutWeights, s: ArrayLike) -> np.ndarray:
    """W_out s for a single state vector."""
    arr = np.asarray(s, dtype=np.float64)
    if arr.ndim != 1 or arr.size != w.dim:
        raise ShapeError("State length does not match readout", w.dim, arr.shape)
    return w.w_out @ arr


def mse(predictions: ArrayLike, targets: ArrayLike) -> float:
    """Mean squared error over equal-length, non-empty sequences."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if p.size == 0:
        raise ParameterError("predictions", "[]", "must be non-empty")
    if p.size != y.size:
        raise ParameterError("targets", y.size, f"length must equal predictions ({p.size})")
    return float(np.mean((p - y) ** 2))


def training_targets(series: ArrayLike, s_t: int) -> np.ndarray:
    """One-step targets x(T-s_t) .. x(T-1) as a 1 x s_t row."""
    arr = np.asarray(series, dtype=np.float64).reshape(-1)
    if not 1 <= s_t <= arr.size - 1:
        raise ParameterError("s_t", s_t, f"must lie in [1, {arr.size - 1}]")
    return arr[-s_t:][None, :]


def forecast_closed_loop(
    model: Model,
    w: ReadoutWeights,
    seed_history: ArrayLike,
    s_p: int,
    targets: ArrayLike,
) -> ForecastResult:
    """Forecast s_p steps by feeding predictions back as inputs.

    Args:
        model: Model instance providing start/state/advance
        w: Readout trained on the model's states
        seed_history: Samples preceding the first forecast target
        s_p: Forecast horizon
        targets: Ground truth for the s_p forecast steps (only scored, never fed)

    Returns:
        ForecastResult; a non-finite prediction truncates the forecast and
        sets diverged
    """
    if s_p < 1:
        raise ParameterError("s_p", s_p, "must be >= 1")
    y = np.asarray(targets, dtype=np.float64).reshape(-1)
    if y.size != s_p:
        raise ShapeError("Target length must equal the horizon", s_p, y.size)
    if w.dim != model.state_dim:
        raise ShapeError("Readout dimension does not match model state", model.state_dim, w.dim)
    if w.n_out != 1:
        raise ShapeError("Closed-loop forecasting needs a single output", 1, w.n_out)

    predictions = np.empty(s_p, dtype=np.float64)
    valid = s_p
    carry = model.start(seed_history)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(s_p):
            value = float(predict_step(w, model.state(carry))[0])
            if not np.isfinite(value):
                valid = k
                break
            predictions[k] = value
            if k < s_p - 1:
                carry = model.advance(carry, value)

    diverged = valid < s_p
    if diverged:
        fill = predictions[valid - 1] if valid > 0 else 0.0
        predictions[valid:] = fill
        logger.warning(f"Forecast diverged after {valid} of {s_p} steps")
    with np.errstate(over="ignore"):
        error = mse(predictions, y)
    return ForecastResult(
        predictions=predictions,
        targets=y,
        mse=error,
        diverged=diverged,
        valid_steps=valid,
    )


def save_weights(w: ReadoutWeights, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(w.to_dict()) + "\n")
    except OSError as e:
        raise ReportIOError(path, e) from e


def load_weights(path: Union[str, Path]) -> ReadoutWeights:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except OSError as e:
        raise ReportIOError(path, e) from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Invalid readout weights file {path}: {e}") from e
    return ReadoutWeights.from_dict(data)
