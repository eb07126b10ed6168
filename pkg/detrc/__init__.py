"""
detrc: deterministic reservoir computing for chaotic time-series forecasting

Models:
- esn: echo state network baseline
- tcrc: stacked delayed inputs through a cascade of pairwise products
- tcrc-elm / tcrc-cm / tcrc-lm: tcrc with a random, Chebyshev or logistic
  state expansion

Only esn and tcrc-elm draw random numbers; the other variants are fully
deterministic. The harness reproduces the Mackey-Glass forecasting protocol
(z-scored series, ten windows per delay, 286-step closed-loop forecasts).
"""

try:
    from importlib.metadata import version
    __version__ = version("detrc")
except Exception:
    __version__ = "0.1.0"

from .activation import ActivationKind, ActivationName, apply, clausen, lobachevsky
from .config import (
    DatasetConfig,
    ExperimentConfig,
    config_hash,
    experiment_config_from_dict,
    load_experiment_config,
)
from .errors import (
    CapacityError,
    ConfigError,
    DegenerateSeriesError,
    DetRCError,
    DivergenceError,
    DomainError,
    InsufficientHistoryError,
    NoViableConfigError,
    NumericError,
    ParameterError,
    ReportIOError,
    ShapeError,
    SpectralRadiusZeroError,
)
from .harness import aggregate, benchmark, evaluate_trajectory, match_state_size, run_experiment
from .mackey_glass import (
    MGParams,
    TimeSeries,
    TrajectorySet,
    generate_dataset,
    integrate_mg,
    load_series,
    make_trajectories,
    save_series,
    z_normalize,
)
from .mapping import (
    ChebyshevParams,
    LogisticParams,
    MapRecipe,
    WeightMap,
    apply_map,
    build_chebyshev,
    build_logistic_sparse,
    build_random_uniform,
    logistic_chain,
    rebuild_map,
    rescale_spectral_radius,
    spectral_radius,
)
from .models import (
    ChebyshevExpansion,
    ESNConfig,
    ESNModel,
    LogisticExpansion,
    RandomExpansion,
    StateMatrix,
    TCRCConfig,
    TCRCModel,
    Variant,
    build_model,
    collect_states,
    esn_states,
    expand_state,
    model_config_from_dict,
    model_config_to_dict,
    ngrc_state_size,
    pairwise_product,
    stack_inputs,
    state_size,
    tcrc_state,
)
from .readout import (
    ForecastResult,
    ReadoutWeights,
    fit_tikhonov,
    forecast_closed_loop,
    load_weights,
    mse,
    predict_step,
    save_weights,
    training_targets,
)
from .report import (
    BenchmarkRow,
    ResultRecord,
    SummaryRow,
    TrialLog,
    emit_report,
    read_report,
)
from .search import (
    SearchSpace,
    default_search_space,
    load_search_space,
    search,
)

__all__ = [
    # Activation
    "ActivationKind",
    "ActivationName",
    "apply",
    "clausen",
    "lobachevsky",
    # Configuration
    "DatasetConfig",
    "ExperimentConfig",
    "config_hash",
    "experiment_config_from_dict",
    "load_experiment_config",
    # Errors
    "CapacityError",
    "ConfigError",
    "DegenerateSeriesError",
    "DetRCError",
    "DivergenceError",
    "DomainError",
    "InsufficientHistoryError",
    "NoViableConfigError",
    "NumericError",
    "ParameterError",
    "ReportIOError",
    "ShapeError",
    "SpectralRadiusZeroError",
    # Harness
    "aggregate",
    "benchmark",
    "evaluate_trajectory",
    "match_state_size",
    "run_experiment",
    # Mackey-Glass
    "MGParams",
    "TimeSeries",
    "TrajectorySet",
    "generate_dataset",
    "integrate_mg",
    "load_series",
    "make_trajectories",
    "save_series",
    "z_normalize",
    # Mapping
    "ChebyshevParams",
    "LogisticParams",
    "MapRecipe",
    "WeightMap",
    "apply_map",
    "build_chebyshev",
    "build_logistic_sparse",
    "build_random_uniform",
    "logistic_chain",
    "rebuild_map",
    "rescale_spectral_radius",
    "spectral_radius",
    # Models
    "ChebyshevExpansion",
    "ESNConfig",
    "ESNModel",
    "LogisticExpansion",
    "RandomExpansion",
    "StateMatrix",
    "TCRCConfig",
    "TCRCModel",
    "Variant",
    "build_model",
    "collect_states",
    "esn_states",
    "expand_state",
    "model_config_from_dict",
    "model_config_to_dict",
    "ngrc_state_size",
    "pairwise_product",
    "stack_inputs",
    "state_size",
    "tcrc_state",
    # Readout
    "ForecastResult",
    "ReadoutWeights",
    "fit_tikhonov",
    "forecast_closed_loop",
    "load_weights",
    "mse",
    "predict_step",
    "save_weights",
    "training_targets",
    # Reports
    "BenchmarkRow",
    "ResultRecord",
    "SummaryRow",
    "TrialLog",
    "emit_report",
    "read_report",
    # Search
    "SearchSpace",
    "default_search_space",
    "load_search_space",
    "search",
]
