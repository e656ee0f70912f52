"""Configuration validation schemas for experiments."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import StrEnum
from typing import Any, ClassVar

from ..const import (
    ALL_METHODS,
    BASELINE_METHODS,
    DEFAULT_CHECKPOINT_INTERVAL,
    DEFAULT_CONTEXT_POINTS,
    DEFAULT_CONTEXT_WINDOWS,
    DEFAULT_DT,
    DEFAULT_GRID_ADAPTATION_STEPS,
    DEFAULT_GRID_CONTEXT_SIZES,
    DEFAULT_HORIZON,
    DEFAULT_INFERENCE_STEPS,
    DEFAULT_INNER_RATE,
    DEFAULT_INNER_STEPS,
    DEFAULT_META_BATCH_SIZE,
    DEFAULT_N_SYSTEMS,
    DEFAULT_OUTER_ITERATIONS,
    DEFAULT_OUTER_RATE,
    DEFAULT_QUERY_RUNS,
    DEFAULT_QUERY_T_FINAL,
    DEFAULT_QUERY_THETA,
    DEFAULT_QUERY_X0,
    DEFAULT_T_FINAL_HIGH,
    DEFAULT_T_FINAL_LOW,
    DEFAULT_TARGET_WINDOWS,
    DEFAULT_THETA_HIGH,
    DEFAULT_THETA_LOW,
    ENCODER_PREFIX,
    META_METHODS,
    METHOD_ANIL,
    METHOD_ANIL_R,
    METHOD_MAML,
    METHOD_SSM,
    METHOD_XFER,
    OUTPUT_LAYER,
    SSM_STEP_MULTIPLIER,
    TRANSITION_LAYER,
)
from ..exceptions import ConfigurationError
from ..model import ArchitectureSpec, Regularization


def _require_int(key: str, value: Any, minimum: int = 0) -> None:
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigurationError(
            f"{key} must be an integer, got {type(value).__name__}",
            config_key=key,
            config_value=value,
        )
    if value < minimum:
        raise ConfigurationError(
            f"{key} must be at least {minimum}, got {value}",
            config_key=key,
            config_value=value,
        )


def _require_real(key: str, value: Any, positive: bool = False) -> None:
    if isinstance(value, bool) or not isinstance(value, int | float):
        raise ConfigurationError(
            f"{key} must be a number, got {type(value).__name__}",
            config_key=key,
            config_value=value,
        )
    if not math.isfinite(value):
        raise ConfigurationError(
            f"{key} must be finite", config_key=key, config_value=value
        )
    if positive and value <= 0:
        raise ConfigurationError(
            f"{key} must be positive, got {value}", config_key=key, config_value=value
        )


def _require_range(key: str, value: Any) -> tuple[float, float]:
    if not isinstance(value, list | tuple) or len(value) != 2:
        raise ConfigurationError(
            f"{key} must be a [low, high] pair", config_key=key, config_value=value
        )
    _require_real(key, value[0])
    _require_real(key, value[1])
    if value[0] > value[1]:
        raise ConfigurationError(
            f"{key} low must not exceed high", config_key=key, config_value=value
        )
    return float(value[0]), float(value[1])


class LayerSelector(StrEnum):
    """Which layers the inner loop adapts."""

    ALL = "all"
    ENCODER_ONLY = "encoder-only"
    HEAD_ONLY = "head-only"

    def resolve(self, layer_names: list[str]) -> list[str]:
        """Return the adapted subset of `layer_names`, in order."""
        if self is LayerSelector.ALL:
            return list(layer_names)
        if self is LayerSelector.ENCODER_ONLY:
            return [n for n in layer_names if n.startswith(f"{ENCODER_PREFIX}.")]
        return [n for n in layer_names if n in (TRANSITION_LAYER, OUTPUT_LAYER)]


class GradientOrder(StrEnum):
    """Whether the outer gradient differentiates through the inner steps."""

    SECOND = "second"
    FIRST = "first"


class OptimizerKind(StrEnum):
    """Outer-loop and supervised update rule."""

    SGD = "sgd"
    ADAM = "adam"


def _coerce_enum(enum: type[StrEnum], key: str, value: Any) -> Any:
    try:
        return enum(value)
    except ValueError as err:
        raise ConfigurationError(
            f"{key} must be one of: {', '.join(m.value for m in enum)}",
            config_key=key,
            config_value=value,
        ) from err


@dataclass
class DataConfig:
    """Source dataset generation parameters."""

    n_systems: int = DEFAULT_N_SYSTEMS
    theta_range: tuple[float, float] = (DEFAULT_THETA_LOW, DEFAULT_THETA_HIGH)
    t_final_range: tuple[float, float] = (DEFAULT_T_FINAL_LOW, DEFAULT_T_FINAL_HIGH)
    dt: float = DEFAULT_DT
    seed: int = 0
    standardize: bool = False

    def __post_init__(self) -> None:
        """Validate data parameters after initialization."""
        _require_int("data.n_systems", self.n_systems, minimum=1)
        self.theta_range = _require_range("data.theta_range", self.theta_range)
        self.t_final_range = _require_range("data.t_final_range", self.t_final_range)
        if self.t_final_range[0] < 0:
            raise ConfigurationError(
                "data.t_final_range must be non-negative",
                config_key="data.t_final_range",
                config_value=self.t_final_range,
            )
        _require_real("data.dt", self.dt, positive=True)
        _require_int("data.seed", self.seed)
        if not isinstance(self.standardize, bool):
            raise ConfigurationError(
                "data.standardize must be a boolean",
                config_key="data.standardize",
                config_value=self.standardize,
            )


@dataclass
class QueryConfig:
    """The deployed query system and the fig3 evaluation settings."""

    theta: float = DEFAULT_QUERY_THETA
    x0: tuple[float, float] = DEFAULT_QUERY_X0
    t_final: float = DEFAULT_QUERY_T_FINAL
    context_points: int = DEFAULT_CONTEXT_POINTS
    horizon: int = DEFAULT_HORIZON
    adaptation_steps: int = DEFAULT_INFERENCE_STEPS

    def __post_init__(self) -> None:
        """Validate query parameters after initialization."""
        _require_real("query.theta", self.theta)
        if not isinstance(self.x0, list | tuple) or len(self.x0) != 2:
            raise ConfigurationError(
                "query.x0 must be a 2-vector",
                config_key="query.x0",
                config_value=self.x0,
            )
        for value in self.x0:
            _require_real("query.x0", value)
        self.x0 = (float(self.x0[0]), float(self.x0[1]))
        _require_real("query.t_final", self.t_final)
        if self.t_final < 0:
            raise ConfigurationError(
                "query.t_final must be non-negative",
                config_key="query.t_final",
                config_value=self.t_final,
            )
        _require_int("query.context_points", self.context_points, minimum=1)
        _require_int("query.horizon", self.horizon)
        _require_int("query.adaptation_steps", self.adaptation_steps)


@dataclass
class LossConfig:
    """Optional penalties on A_z added to the training loss."""

    l1_penalty: float = 0.0
    l2_penalty: float = 0.0

    def __post_init__(self) -> None:
        """Validate penalty weights after initialization."""
        for key, value in (("l1_penalty", self.l1_penalty), ("l2_penalty", self.l2_penalty)):
            _require_real(f"loss.{key}", value)
            if value < 0:
                raise ConfigurationError(
                    f"loss.{key} must be non-negative",
                    config_key=f"loss.{key}",
                    config_value=value,
                )

    def regularization(self) -> Regularization:
        """Return the penalties as a `Regularization`."""
        return Regularization(l1=float(self.l1_penalty), l2=float(self.l2_penalty))


@dataclass
class MetaConfig:
    """Bi-level training hyperparameters."""

    inner_rate: float = DEFAULT_INNER_RATE
    outer_rate: float = DEFAULT_OUTER_RATE
    inner_steps: int = DEFAULT_INNER_STEPS
    batch_size: int = DEFAULT_META_BATCH_SIZE
    outer_iterations: int = DEFAULT_OUTER_ITERATIONS
    selector: LayerSelector = LayerSelector.ALL
    gradient_order: GradientOrder = GradientOrder.SECOND
    optimizer: OptimizerKind = OptimizerKind.SGD
    context_windows: int = DEFAULT_CONTEXT_WINDOWS
    target_windows: int = DEFAULT_TARGET_WINDOWS
    checkpoint_interval: int = DEFAULT_CHECKPOINT_INTERVAL
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate hyperparameters after initialization."""
        _require_real("meta.inner_rate", self.inner_rate, positive=True)
        _require_real("meta.outer_rate", self.outer_rate, positive=True)
        # inner_steps = 0 reduces to a supervised step on the target set
        _require_int("meta.inner_steps", self.inner_steps)
        _require_int("meta.batch_size", self.batch_size, minimum=1)
        _require_int("meta.outer_iterations", self.outer_iterations)
        _require_int("meta.context_windows", self.context_windows, minimum=1)
        _require_int("meta.target_windows", self.target_windows, minimum=1)
        _require_int("meta.checkpoint_interval", self.checkpoint_interval)
        _require_int("meta.seed", self.seed)
        self.selector = _coerce_enum(LayerSelector, "meta.selector", self.selector)
        self.gradient_order = _coerce_enum(
            GradientOrder, "meta.gradient_order", self.gradient_order
        )
        self.optimizer = _coerce_enum(OptimizerKind, "meta.optimizer", self.optimizer)

    def for_method(self, method: str) -> MetaConfig:
        """Resolve the layer selector implied by a meta method name.

        maml adapts every layer and anil-r adapts the head. anil adapts the
        encoder unless a head-only selector was configured explicitly.
        """
        if method == METHOD_MAML:
            return replace(self, selector=LayerSelector.ALL)
        if method == METHOD_ANIL_R:
            return replace(self, selector=LayerSelector.HEAD_ONLY)
        if method == METHOD_ANIL:
            if self.selector is LayerSelector.ALL:
                return replace(self, selector=LayerSelector.ENCODER_ONLY)
            return replace(self)
        raise ConfigurationError(
            f"{method} is not a meta-learning method",
            config_key="method",
            config_value=method,
        )


@dataclass
class BaselineConfig:
    """Supervised baseline training parameters.

    `training_steps` and `adaptation_steps` left as None are derived from the
    meta configuration by `for_method`.
    """

    method: str = METHOD_XFER
    learning_rate: float = DEFAULT_OUTER_RATE
    training_steps: int | None = None
    adaptation_steps: int | None = None
    batch_size: int = DEFAULT_META_BATCH_SIZE
    optimizer: OptimizerKind = OptimizerKind.SGD
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate baseline parameters after initialization."""
        if self.method not in BASELINE_METHODS:
            raise ConfigurationError(
                f"baseline.method must be one of: {', '.join(BASELINE_METHODS)}",
                config_key="baseline.method",
                config_value=self.method,
            )
        _require_real("baseline.learning_rate", self.learning_rate, positive=True)
        if self.training_steps is not None:
            _require_int("baseline.training_steps", self.training_steps)
        if self.adaptation_steps is not None:
            _require_int("baseline.adaptation_steps", self.adaptation_steps)
        _require_int("baseline.batch_size", self.batch_size, minimum=1)
        _require_int("baseline.seed", self.seed)
        self.optimizer = _coerce_enum(
            OptimizerKind, "baseline.optimizer", self.optimizer
        )

    def for_method(
        self, method: str, meta: MetaConfig, inference_steps: int
    ) -> BaselineConfig:
        """Resolve step counts for `method` against the meta configuration.

        ssm trains for SSM_STEP_MULTIPLIER times the meta outer iterations,
        all-noadapt never adapts and xfer adapts for as many steps as the
        meta-learned models get at inference.

        Raises:
            ConfigurationError: if an explicit value contradicts these rules
        """
        base = replace(self, method=method)
        default_steps = meta.outer_iterations * (
            SSM_STEP_MULTIPLIER if method == METHOD_SSM else 1
        )
        required_adaptation = inference_steps if method == METHOD_XFER else 0
        if method == METHOD_SSM and self.training_steps is not None:
            if self.training_steps != default_steps:
                raise ConfigurationError(
                    "ssm must train for "
                    f"{SSM_STEP_MULTIPLIER}x the meta outer iterations ({default_steps})",
                    config_key="baseline.training_steps",
                    config_value=self.training_steps,
                )
        if (
            self.adaptation_steps is not None
            and self.adaptation_steps != required_adaptation
        ):
            raise ConfigurationError(
                f"{method} requires adaptation_steps={required_adaptation}",
                config_key="baseline.adaptation_steps",
                config_value=self.adaptation_steps,
            )
        return replace(
            base,
            training_steps=(
                default_steps if self.training_steps is None else self.training_steps
            ),
            adaptation_steps=required_adaptation,
        )


@dataclass
class GridSpec:
    """Context-size by adaptation-steps evaluation grid."""

    context_sizes: tuple[int, ...] = DEFAULT_GRID_CONTEXT_SIZES
    adaptation_steps: tuple[int, ...] = DEFAULT_GRID_ADAPTATION_STEPS
    methods: tuple[str, ...] = META_METHODS
    query_runs: int = DEFAULT_QUERY_RUNS
    seed: int = 0

    def __post_init__(self) -> None:
        """Validate the grid after initialization."""
        self.context_sizes = tuple(self.context_sizes)
        self.adaptation_steps = tuple(self.adaptation_steps)
        self.methods = tuple(self.methods)
        if not self.context_sizes or not self.adaptation_steps:
            raise ConfigurationError(
                "grid needs at least one context size and one step count",
                config_key="grid",
                config_value=(self.context_sizes, self.adaptation_steps),
            )
        for size in self.context_sizes:
            _require_int("grid.context_sizes", size, minimum=1)
        for steps in self.adaptation_steps:
            _require_int("grid.adaptation_steps", steps)
        if not self.methods:
            raise ConfigurationError(
                "grid.methods must name at least one method",
                config_key="grid.methods",
                config_value=self.methods,
            )
        unknown = [m for m in self.methods if m not in ALL_METHODS]
        if unknown:
            raise ConfigurationError(
                f"Unknown methods: {', '.join(unknown)}",
                config_key="grid.methods",
                config_value=unknown,
            )
        if len(set(self.methods)) != len(self.methods):
            raise ConfigurationError(
                "grid.methods contains duplicates",
                config_key="grid.methods",
                config_value=self.methods,
            )
        _require_int("grid.query_runs", self.query_runs, minimum=1)
        _require_int("grid.seed", self.seed)


@dataclass
class RunConfig:
    """Orchestration settings."""

    output_dir: str | None = None
    workers: int = 1
    export_csv: bool = False

    def __post_init__(self) -> None:
        """Validate run settings after initialization."""
        _require_int("run.workers", self.workers, minimum=1)
        if self.output_dir is not None and not isinstance(self.output_dir, str):
            raise ConfigurationError(
                "run.output_dir must be a string",
                config_key="run.output_dir",
                config_value=self.output_dir,
            )


@dataclass
class ExperimentConfig:
    """Every section of an experiment, validated as a whole."""

    data: DataConfig = field(default_factory=DataConfig)
    query: QueryConfig = field(default_factory=QueryConfig)
    architecture: ArchitectureSpec = field(default_factory=ArchitectureSpec)
    loss: LossConfig = field(default_factory=LossConfig)
    meta: MetaConfig = field(default_factory=MetaConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    run: RunConfig = field(default_factory=RunConfig)

    SECTIONS: ClassVar[dict[str, type]] = {
        "data": DataConfig,
        "query": QueryConfig,
        "architecture": ArchitectureSpec,
        "loss": LossConfig,
        "meta": MetaConfig,
        "baseline": BaselineConfig,
        "grid": GridSpec,
        "run": RunConfig,
    }

    @classmethod
    def from_dict(cls, document: dict[str, Any] | None) -> ExperimentConfig:
        """Build a config from a nested mapping, rejecting unknown keys.

        Raises:
            ConfigurationError: on unknown sections or keys, or invalid values
        """
        document = document or {}
        if not isinstance(document, dict):
            raise ConfigurationError(
                "Config document must be a mapping",
                config_key="<root>",
                config_value=type(document).__name__,
            )
        unknown = sorted(set(document) - set(cls.SECTIONS))
        if unknown:
            raise ConfigurationError(
                f"Unknown config sections: {', '.join(unknown)}",
                config_key=unknown[0],
                config_value=unknown,
            )

        sections: dict[str, Any] = {}
        for name, section_type in cls.SECTIONS.items():
            values = document.get(name) or {}
            if not isinstance(values, dict):
                raise ConfigurationError(
                    f"Section {name} must be a mapping",
                    config_key=name,
                    config_value=values,
                )
            allowed = {f.name for f in fields(section_type)}
            extra = sorted(set(values) - allowed)
            if extra:
                raise ConfigurationError(
                    f"Unknown keys in {name}: {', '.join(extra)}",
                    config_key=f"{name}.{extra[0]}",
                    config_value=extra,
                )
            try:
                sections[name] = section_type(**values)
            except ConfigurationError:
                raise
            except (TypeError, ValueError) as err:
                raise ConfigurationError(
                    f"Invalid section {name}: {err}", config_key=name
                ) from err
        return cls(**sections)

    def to_dict(self) -> dict[str, Any]:
        """Canonical plain form; `from_dict(to_dict())` round-trips."""
        document: dict[str, Any] = {}
        for name in self.SECTIONS:
            section = getattr(self, name)
            values = (
                section.to_dict() if isinstance(section, ArchitectureSpec) else asdict(section)
            )
            document[name] = {key: _plain(value) for key, value in values.items()}
        return document

    def digest(self) -> str:
        """First 16 hex chars of the SHA-256 of the canonical JSON form.

        Scheduling settings (output directory, worker count) are left out.
        """
        document = self.to_dict()
        for key in DIGEST_EXCLUDED_RUN_KEYS:
            document["run"].pop(key, None)
        canonical = json.dumps(document, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]

    def resolve_methods(self, methods: list[str]) -> list[str]:
        """Validate a user-supplied method list.

        Raises:
            ConfigurationError: if the list is empty or names unknown methods
        """
        if not methods:
            raise ConfigurationError(
                "At least one method is required", config_key="methods", config_value=[]
            )
        unknown = [m for m in methods if m not in ALL_METHODS]
        if unknown:
            raise ConfigurationError(
                f"Unknown methods: {', '.join(unknown)}",
                config_key="methods",
                config_value=unknown,
            )
        return list(methods)


def _plain(value: Any) -> Any:
    if isinstance(value, StrEnum):
        return value.value
    if isinstance(value, tuple | list):
        return [_plain(v) for v in value]
    return value


DIGEST_EXCLUDED_RUN_KEYS: tuple[str, ...] = ("output_dir", "workers")
