"""Reservoir state construction for the five model variants.

- esn:      recurrent states s(t) = f(W_in x(t) + W_res s(t-1))
- tcrc:     stacked delayed inputs passed through L layers of adjacent
            pairwise products, each followed by the activation
- tcrc-elm: tcrc state expanded by a random uniform map, f(W s)
- tcrc-cm:  tcrc state expanded by a Chebyshev map
- tcrc-lm:  tcrc state expanded by a block-sparse logistic map

Only esn and tcrc-elm use random numbers. Model instances build their
weights once and expose a small protocol used for closed-loop forecasting:

    carry = model.start(history)     # condition on past samples
    s = model.state(carry)           # feature vector for the readout
    carry = model.advance(carry, x)  # feed the next sample
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Optional, Union

import numpy as np
from numpy.typing import ArrayLike

from .activation import ActivationKind, apply
from .errors import (
    ConfigError,
    DivergenceError,
    InsufficientHistoryError,
    ParameterError,
    ShapeError,
)
from .mapping import (
    ChebyshevParams,
    LogisticParams,
    WeightMap,
    apply_map,
    build_chebyshev,
    build_logistic_sparse,
    build_random_uniform,
    rescale_spectral_radius,
)

logger = logging.getLogger(__name__)

DEFAULT_BETA = 1e-6
DEFAULT_WASHOUT = 100


class Variant(str, Enum):
    ESN = "esn"
    TCRC = "tcrc"
    TCRC_ELM = "tcrc-elm"
    TCRC_CM = "tcrc-cm"
    TCRC_LM = "tcrc-lm"


VARIANT_NAMES = [v.value for v in Variant]
RANDOM_VARIANTS = frozenset({Variant.ESN, Variant.TCRC_ELM})
DETERMINISTIC_VARIANTS = frozenset(set(Variant) - RANDOM_VARIANTS)


@dataclass(frozen=True)
class RandomExpansion:
    sigma_hat: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class ChebyshevExpansion:
    params: ChebyshevParams


@dataclass(frozen=True)
class LogisticExpansion:
    params: LogisticParams


Expansion = Union[RandomExpansion, ChebyshevExpansion, LogisticExpansion]


@dataclass(frozen=True)
class TCRCConfig:
    """Hyper-parameters of the TCRC family.

    Attributes:
        delta_hat: Input stack depth minus one
        layers: Number of pairwise-product layers L
        activation: Activation applied after every layer and the expansion
        expansion: None for plain TCRC, otherwise the expansion map recipe
        n_expand: Expansion factor n (expanded size = n * base size)
        beta: Ridge coefficient of the readout
        n_in: Input dimension
        concat_layers: Feed [expanded; base] to the readout instead of expanded only
    """

    delta_hat: int
    layers: int = 1
    activation: ActivationKind = field(default_factory=ActivationKind)
    expansion: Optional[Expansion] = None
    n_expand: int = 1
    beta: float = DEFAULT_BETA
    n_in: int = 1
    concat_layers: bool = False

    def __post_init__(self) -> None:
        if self.delta_hat < 0 or int(self.delta_hat) != self.delta_hat:
            raise ParameterError("delta_hat", self.delta_hat, "must be an integer >= 0")
        if self.layers < 1 or int(self.layers) != self.layers:
            raise ParameterError("layers", self.layers, "must be an integer >= 1")
        if self.n_in < 1:
            raise ParameterError("n_in", self.n_in, "must be >= 1")
        if self.n_expand < 1 or int(self.n_expand) != self.n_expand:
            raise ParameterError("n_expand", self.n_expand, "must be an integer >= 1")
        if self.beta < 0:
            raise ParameterError("beta", self.beta, "must be >= 0")
        stacked = (self.delta_hat + 1) * self.n_in
        if self.layers > stacked - 1:
            raise ConfigError(
                f"{self.layers} layers need a stack of at least {self.layers + 1} values, "
                f"got (delta_hat + 1) * n_in = {stacked}"
            )
        if isinstance(self.expansion, LogisticExpansion):
            if self.expansion.params.n_expand != self.n_expand:
                raise ParameterError(
                    "n_expand",
                    self.expansion.params.n_expand,
                    f"logistic map blocks must match the expansion factor {self.n_expand}",
                )

    @property
    def variant(self) -> Variant:
        if self.expansion is None:
            return Variant.TCRC
        if isinstance(self.expansion, RandomExpansion):
            return Variant.TCRC_ELM
        if isinstance(self.expansion, ChebyshevExpansion):
            return Variant.TCRC_CM
        return Variant.TCRC_LM

    @property
    def stacked_size(self) -> int:
        return (self.delta_hat + 1) * self.n_in

    @property
    def base_size(self) -> int:
        """Length of the concatenated layer states."""
        m = self.stacked_size
        return sum(m - 1 - layer for layer in range(self.layers))


@dataclass(frozen=True)
class ESNConfig:
    """Hyper-parameters of the echo state network baseline."""

    n_res: int = 300
    rho: float = 0.9
    sigma: float = 0.5
    seed: int = 0
    activation: ActivationKind = field(default_factory=ActivationKind)
    washout: int = DEFAULT_WASHOUT
    beta: float = DEFAULT_BETA
    n_in: int = 1

    def __post_init__(self) -> None:
        if self.n_res < 1 or int(self.n_res) != self.n_res:
            raise ParameterError("n_res", self.n_res, "must be an integer >= 1")
        if not self.rho > 0:
            raise ParameterError("rho", self.rho, "must be > 0")
        if not self.sigma > 0:
            raise ParameterError("sigma", self.sigma, "must be > 0")
        if self.washout < 0:
            raise ParameterError("washout", self.washout, "must be >= 0")
        if self.beta < 0:
            raise ParameterError("beta", self.beta, "must be >= 0")

    @property
    def variant(self) -> Variant:
        return Variant.ESN


ModelConfig = Union[TCRCConfig, ESNConfig]


@dataclass(frozen=True, eq=False)
class StateMatrix:
    """Reservoir states, one column per training step."""

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 2 or 0 in values.shape:
            raise ShapeError("State matrix must be a non-empty 2-D array", "2-D", values.shape)
        if not np.all(np.isfinite(values)):
            raise DivergenceError("state collection")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    @property
    def steps(self) -> int:
        return int(self.values.shape[1])

    @property
    def columns(self) -> np.ndarray:
        return self.values.T


# =============================================================================
# TCRC building blocks
# =============================================================================


def _as_series(series: ArrayLike) -> np.ndarray:
    arr = np.asarray(series, dtype=np.float64)
    if arr.ndim not in (1, 2):
        raise ShapeError("Series must be 1-D or (T, n_in)", "1-D or 2-D", arr.shape)
    return arr


def _stacked(arr: np.ndarray, ts: np.ndarray, delta_hat: int) -> np.ndarray:
    """Rows [x(t), x(t-1), ..., x(t-delta_hat)] for every t in ts, one column per t."""
    arr2 = arr.reshape(arr.shape[0], -1)
    return np.vstack([arr2[ts - d].T for d in range(delta_hat + 1)])


def stack_inputs(series: ArrayLike, t: int, delta_hat: int) -> np.ndarray:
    """Concatenate x(t), x(t-1), ..., x(t-delta_hat).

    Raises:
        InsufficientHistoryError: t < delta_hat
    """
    arr = _as_series(series)
    if t < delta_hat:
        raise InsufficientHistoryError(delta_hat + 1, t + 1)
    if t >= arr.shape[0]:
        raise ShapeError("Index past the end of the series", f"< {arr.shape[0]}", t)
    return _stacked(arr, np.array([t]), delta_hat)[:, 0]


def pairwise_product(v: ArrayLike) -> np.ndarray:
    """Products of temporal neighbours: out[i] = v[i] * v[i+1].

    Works along axis 0, so a (m, T) matrix of stacked columns maps to (m-1, T).
    """
    arr = np.asarray(v, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[0] < 2:
        raise ShapeError("Pairwise product needs at least 2 values", ">= 2", arr.shape)
    return arr[:-1] * arr[1:]


def _cascade(stacked: np.ndarray, layers: int, activation: ActivationKind) -> np.ndarray:
    out = []
    v = stacked
    for _ in range(layers):
        v = apply(pairwise_product(v), activation)
        out.append(v)
    return np.vstack(out)


def tcrc_state(series: ArrayLike, t: int, cfg: TCRCConfig) -> np.ndarray:
    """Concatenated layer states at time t (before any expansion)."""
    x_hat = stack_inputs(series, t, cfg.delta_hat)
    if x_hat.size != cfg.stacked_size:
        raise ShapeError("Input dimension does not match n_in", cfg.stacked_size, x_hat.size)
    return _cascade(x_hat[:, None], cfg.layers, cfg.activation)[:, 0]


def build_expansion_map(cfg: TCRCConfig) -> WeightMap:
    """Expansion map of shape (n_expand * base_size, base_size)."""
    cols = cfg.base_size
    rows = cfg.n_expand * cols
    expansion = cfg.expansion
    if isinstance(expansion, RandomExpansion):
        return build_random_uniform(rows, cols, expansion.sigma_hat, expansion.seed)
    if isinstance(expansion, ChebyshevExpansion):
        return build_chebyshev(rows, cols, expansion.params)
    if isinstance(expansion, LogisticExpansion):
        return build_logistic_sparse(rows, cols, expansion.params)
    raise ConfigError("Plain tcrc has no expansion map")


def expand_state(s: ArrayLike, cfg: TCRCConfig, w: Optional[WeightMap] = None) -> np.ndarray:
    """f(W s) for a base state vector (or a matrix of state columns).

    Args:
        s: Base state(s) of length base_size along axis 0
        cfg: Configuration with an expansion
        w: Prebuilt expansion map; built from cfg when omitted

    Raises:
        ConfigError: cfg has no expansion
        ShapeError: s does not match the map
    """
    if cfg.expansion is None:
        raise ConfigError("expand_state needs a configuration with an expansion")
    if w is None:
        w = build_expansion_map(cfg)
    return apply(apply_map(w, s), cfg.activation)


# =============================================================================
# ESN
# =============================================================================


def build_esn_weights(cfg: ESNConfig) -> tuple[WeightMap, WeightMap]:
    """Input map (stream 0) and spectrally rescaled recurrence (stream 1)."""
    w_in = build_random_uniform(cfg.n_res, cfg.n_in, cfg.sigma, cfg.seed, stream=0)
    w_res = build_random_uniform(cfg.n_res, cfg.n_res, cfg.sigma, cfg.seed, stream=1)
    return w_in, rescale_spectral_radius(w_res, cfg.rho)


def _esn_drive(
    arr: np.ndarray,
    cfg: ESNConfig,
    w_in: WeightMap,
    w_res: WeightMap,
    initial: Optional[np.ndarray] = None,
) -> np.ndarray:
    """States after each input sample, shape (n_res, len(arr))."""
    inputs = arr.reshape(arr.shape[0], -1)
    drive = apply_map(w_in, inputs.T)
    states = np.empty((cfg.n_res, inputs.shape[0]), dtype=np.float64)
    s = np.zeros(cfg.n_res) if initial is None else initial
    for t in range(inputs.shape[0]):
        s = apply(drive[:, t] + apply_map(w_res, s), cfg.activation)
        if not np.all(np.isfinite(s)):
            raise DivergenceError("ESN state update", t)
        states[:, t] = s
    return states


def esn_states(
    series: ArrayLike,
    cfg: ESNConfig,
    steps: int,
    weights: Optional[tuple[WeightMap, WeightMap]] = None,
) -> StateMatrix:
    """Drive the ESN from zero state and keep the last `steps` states.

    At least `washout` leading states are discarded.

    Raises:
        InsufficientHistoryError: len(series) < steps + washout
        DivergenceError: a state becomes non-finite
    """
    arr = _as_series(series)
    if steps < 1:
        raise ParameterError("steps", steps, "must be >= 1")
    if arr.shape[0] < steps + cfg.washout:
        raise InsufficientHistoryError(steps + cfg.washout, arr.shape[0])
    w_in, w_res = weights if weights is not None else build_esn_weights(cfg)
    states = _esn_drive(arr, cfg, w_in, w_res)
    return StateMatrix(states[:, -steps:])


# =============================================================================
# Model instances
# =============================================================================


class TCRCModel:
    """A TCRC-family model with its expansion map built once."""

    def __init__(self, cfg: TCRCConfig):
        self.cfg = cfg
        self.expansion_map: Optional[WeightMap] = (
            build_expansion_map(cfg) if cfg.expansion is not None else None
        )

    @property
    def variant(self) -> Variant:
        return self.cfg.variant

    @property
    def state_dim(self) -> int:
        return state_size(self.cfg)

    @property
    def min_history(self) -> int:
        return self.cfg.delta_hat + 1

    def features(self, series: ArrayLike, ts: ArrayLike) -> np.ndarray:
        """Readout features for every index in ts, one column per index."""
        arr = _as_series(series)
        idx = np.asarray(ts, dtype=np.int64)
        if idx.size and idx.min() < self.cfg.delta_hat:
            raise InsufficientHistoryError(self.cfg.delta_hat + 1, int(idx.min()) + 1)
        stacked = _stacked(arr, idx, self.cfg.delta_hat)
        base = _cascade(stacked, self.cfg.layers, self.cfg.activation)
        if self.expansion_map is None:
            return base
        expanded = apply(apply_map(self.expansion_map, base), self.cfg.activation)
        if self.cfg.concat_layers:
            return np.vstack([expanded, base])
        return expanded

    def collect(self, series: ArrayLike, s_t: int) -> StateMatrix:
        arr = _as_series(series)
        first = arr.shape[0] - 1 - s_t
        if s_t < 1:
            raise ParameterError("s_t", s_t, "must be >= 1")
        if first < self.cfg.delta_hat:
            raise InsufficientHistoryError(s_t + self.cfg.delta_hat + 1, arr.shape[0])
        return StateMatrix(self.features(arr, np.arange(first, first + s_t)))

    def start(self, history: ArrayLike) -> np.ndarray:
        arr = _as_series(history)
        if arr.shape[0] < self.min_history:
            raise InsufficientHistoryError(self.min_history, arr.shape[0])
        return arr[-self.min_history:].copy()

    def state(self, carry: np.ndarray) -> np.ndarray:
        return self.features(carry, [self.cfg.delta_hat])[:, 0]

    def advance(self, carry: np.ndarray, value: Any) -> np.ndarray:
        return np.concatenate([carry[1:], np.reshape(value, (1,) + carry.shape[1:])])


class ESNModel:
    """An echo state network with its input and recurrence maps built once."""

    def __init__(self, cfg: ESNConfig):
        self.cfg = cfg
        self.w_in, self.w_res = build_esn_weights(cfg)
        logger.debug(f"Built ESN n_res={cfg.n_res} rho={cfg.rho} seed={cfg.seed}")

    @property
    def variant(self) -> Variant:
        return Variant.ESN

    @property
    def state_dim(self) -> int:
        return self.cfg.n_res

    @property
    def min_history(self) -> int:
        return self.cfg.washout + 1

    def collect(self, series: ArrayLike, s_t: int) -> StateMatrix:
        arr = _as_series(series)
        # States at t = T-1-s_t .. T-2 are driven by x(0) .. x(T-2)
        return esn_states(arr[:-1], self.cfg, s_t, (self.w_in, self.w_res))

    def start(self, history: ArrayLike) -> np.ndarray:
        arr = _as_series(history)
        if arr.shape[0] < 1:
            raise InsufficientHistoryError(1, 0)
        return _esn_drive(arr, self.cfg, self.w_in, self.w_res)[:, -1]

    def state(self, carry: np.ndarray) -> np.ndarray:
        return carry

    def advance(self, carry: np.ndarray, value: Any) -> np.ndarray:
        drive = apply_map(self.w_in, np.reshape(value, (self.cfg.n_in,)))
        return apply(drive + apply_map(self.w_res, carry), self.cfg.activation)


Model = Union[TCRCModel, ESNModel]


def build_model(cfg: ModelConfig) -> Model:
    if isinstance(cfg, ESNConfig):
        return ESNModel(cfg)
    return TCRCModel(cfg)


def collect_states(series: ArrayLike, model: Union[ModelConfig, Model], s_t: int) -> StateMatrix:
    """Training states at t = T-1-s_t .. T-2; column j pairs with target x(T-s_t+j)."""
    if isinstance(model, (TCRCConfig, ESNConfig)):
        model = build_model(model)
    return model.collect(series, s_t)


def state_size(cfg: ModelConfig) -> int:
    """Dimension of the state the readout sees."""
    if isinstance(cfg, ESNConfig):
        return cfg.n_res
    base = cfg.base_size
    if cfg.expansion is None:
        return base
    size = cfg.n_expand * base
    return size + base if cfg.concat_layers else size


def ngrc_state_size(delta_hat: int, n_in: int = 1) -> int:
    """Constant, linear and unique quadratic terms of a delay vector of depth delta_hat + 1."""
    d = (delta_hat + 1) * n_in
    return 1 + d + d * (d + 1) // 2


def with_seed(cfg: ModelConfig, seed: int) -> ModelConfig:
    """Same configuration drawing its random maps from `seed`."""
    if isinstance(cfg, ESNConfig):
        return replace(cfg, seed=int(seed))
    if isinstance(cfg.expansion, RandomExpansion):
        return replace(cfg, expansion=replace(cfg.expansion, seed=int(seed)))
    return cfg


# =============================================================================
# JSON configuration
# =============================================================================

_TCRC_KEYS = {"delta_hat", "layers", "activation", "k_c", "beta", "n_in", "concat_layers"}
_MODEL_KEYS = {
    Variant.ESN: {"n_res", "rho", "sigma", "seed", "activation", "k_c", "washout", "beta"},
    Variant.TCRC: _TCRC_KEYS,
    Variant.TCRC_ELM: _TCRC_KEYS | {"n_expand", "sigma_hat", "seed"},
    Variant.TCRC_CM: _TCRC_KEYS | {"n_expand", "p", "q", "k_cheb"},
    Variant.TCRC_LM: _TCRC_KEYS | {"n_expand", "r", "a", "b"},
}

MODEL_DEFAULTS: dict[Variant, dict[str, Any]] = {
    Variant.ESN: {
        "n_res": 300, "rho": 0.9, "sigma": 0.5, "seed": 0, "activation": "tanh",
        "k_c": 8, "washout": DEFAULT_WASHOUT, "beta": DEFAULT_BETA,
    },
    Variant.TCRC: {
        "delta_hat": 10, "layers": 2, "activation": "tanh", "k_c": 8,
        "beta": DEFAULT_BETA, "n_in": 1, "concat_layers": False,
    },
}
_TCRC_DEFAULTS = MODEL_DEFAULTS[Variant.TCRC]
MODEL_DEFAULTS[Variant.TCRC_ELM] = {**_TCRC_DEFAULTS, "n_expand": 2, "sigma_hat": 1.0, "seed": 0}
MODEL_DEFAULTS[Variant.TCRC_CM] = {
    **_TCRC_DEFAULTS, "n_expand": 2, "p": 0.5, "q": 1.0, "k_cheb": 2.0,
}
MODEL_DEFAULTS[Variant.TCRC_LM] = {**_TCRC_DEFAULTS, "n_expand": 2, "r": 3.8, "a": 0.9, "b": 1.0}


def parse_variant(name: Any) -> Variant:
    try:
        return Variant(str(name).lower())
    except ValueError:
        raise ConfigError(
            f"Unknown model variant {name!r}; expected one of {', '.join(VARIANT_NAMES)}"
        ) from None


def model_config_from_dict(data: dict[str, Any]) -> ModelConfig:
    """Build a model configuration from its flat JSON form.

    Raises:
        ConfigError: missing/unknown variant or unknown keys
        ParameterError: values out of range
    """
    if "variant" not in data:
        raise ConfigError("Model configuration needs a 'variant' key")
    variant = parse_variant(data["variant"])
    values = {k: v for k, v in data.items() if k != "variant"}
    unknown = sorted(set(values) - _MODEL_KEYS[variant])
    if unknown:
        raise ConfigError(f"Unknown keys for variant {variant.value}: {', '.join(unknown)}")
    merged = {**MODEL_DEFAULTS[variant], **values}
    activation = ActivationKind.from_name(str(merged["activation"]), int(merged["k_c"]))

    if variant is Variant.ESN:
        return ESNConfig(
            n_res=int(merged["n_res"]),
            rho=float(merged["rho"]),
            sigma=float(merged["sigma"]),
            seed=int(merged["seed"]),
            activation=activation,
            washout=int(merged["washout"]),
            beta=float(merged["beta"]),
        )

    expansion: Optional[Expansion] = None
    n_expand = int(merged.get("n_expand", 1))
    if variant is Variant.TCRC_ELM:
        expansion = RandomExpansion(float(merged["sigma_hat"]), int(merged["seed"]))
        if not expansion.sigma_hat > 0:
            raise ParameterError("sigma_hat", expansion.sigma_hat, "must be > 0")
    elif variant is Variant.TCRC_CM:
        expansion = ChebyshevExpansion(
            ChebyshevParams(float(merged["p"]), float(merged["q"]), float(merged["k_cheb"]))
        )
    elif variant is Variant.TCRC_LM:
        expansion = LogisticExpansion(
            LogisticParams(float(merged["r"]), float(merged["a"]), float(merged["b"]), n_expand)
        )

    return TCRCConfig(
        delta_hat=int(merged["delta_hat"]),
        layers=int(merged["layers"]),
        activation=activation,
        expansion=expansion,
        n_expand=n_expand,
        beta=float(merged["beta"]),
        n_in=int(merged["n_in"]),
        concat_layers=bool(merged["concat_layers"]),
    )


def model_config_to_dict(cfg: ModelConfig) -> dict[str, Any]:
    """Flat JSON form with the variant discriminator first."""
    data: dict[str, Any] = {"variant": cfg.variant.value}
    if isinstance(cfg, ESNConfig):
        data.update(
            n_res=cfg.n_res, rho=cfg.rho, sigma=cfg.sigma, seed=cfg.seed,
            activation=cfg.activation.name, k_c=cfg.activation.k_c,
            washout=cfg.washout, beta=cfg.beta,
        )
        return data

    data.update(
        delta_hat=cfg.delta_hat, layers=cfg.layers, activation=cfg.activation.name,
        k_c=cfg.activation.k_c, beta=cfg.beta, n_in=cfg.n_in, concat_layers=cfg.concat_layers,
    )
    expansion = cfg.expansion
    if isinstance(expansion, RandomExpansion):
        data.update(n_expand=cfg.n_expand, sigma_hat=expansion.sigma_hat, seed=expansion.seed)
    elif isinstance(expansion, ChebyshevExpansion):
        p = expansion.params
        data.update(n_expand=cfg.n_expand, p=p.p, q=p.q, k_cheb=p.k_cheb)
    elif isinstance(expansion, LogisticExpansion):
        p = expansion.params
        data.update(n_expand=cfg.n_expand, r=p.r, a=p.a, b=p.b)
    return data
