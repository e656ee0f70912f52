"""Source and query datasets for the van der Pol family."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ..const import (
    DEFAULT_DT,
    DEFAULT_QUERY_T_FINAL,
    DEFAULT_QUERY_THETA,
    DEFAULT_QUERY_X0,
    DEFAULT_T_FINAL_HIGH,
    DEFAULT_T_FINAL_LOW,
    DEFAULT_X0_HIGH,
    DEFAULT_X0_LOW,
)
from ..exceptions import ConfigurationError, NumericError, ShapeError, SizingError
from ..types import DatasetSummary, Tensor
from ..utils.parallel import ordered_map
from ..utils.performance import performance_monitor
from .vdp import simulate, step_count

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class SystemParams:
    """Parameters of one van der Pol realization."""

    theta: float
    x0: tuple[float, float]
    t_final: float
    dt: float = DEFAULT_DT

    def __post_init__(self) -> None:
        """Validate parameters after initialization."""
        object.__setattr__(self, "x0", (float(self.x0[0]), float(self.x0[1])))
        if not math.isfinite(self.theta):
            raise ConfigurationError(
                "theta must be finite", config_key="theta", config_value=self.theta
            )
        if not all(math.isfinite(v) for v in self.x0):
            raise ConfigurationError(
                "x0 must be finite", config_key="x0", config_value=self.x0
            )
        if not self.dt > 0:
            raise ConfigurationError(
                "dt must be positive", config_key="dt", config_value=self.dt
            )
        if not self.t_final >= 0:
            raise ConfigurationError(
                "t_final must be non-negative",
                config_key="t_final",
                config_value=self.t_final,
            )

    @property
    def length(self) -> int:
        """Number of samples a simulation of these parameters produces."""
        return step_count(self.t_final, self.dt) + 1


@dataclass
class Trajectory:
    """Sampled full-state outputs of one system realization."""

    params: SystemParams
    outputs: Tensor

    def __post_init__(self) -> None:
        """Validate output layout after initialization."""
        self.outputs = np.asarray(self.outputs, dtype=np.float64)
        if self.outputs.ndim != 2 or self.outputs.shape[1] != 2:
            raise ShapeError(
                "Trajectory outputs must be (length, 2)",
                op="trajectory",
                shapes=[self.outputs.shape],
            )
        if self.outputs.shape[0] != self.params.length:
            raise SizingError(
                "Trajectory length does not match its parameters",
                required=self.params.length,
                available=self.outputs.shape[0],
            )
        if not np.all(np.isfinite(self.outputs)):
            raise NumericError("Trajectory contains non-finite outputs")

    @property
    def length(self) -> int:
        """Number of samples."""
        return int(self.outputs.shape[0])

    def segment(self, start: int, stop: int) -> Tensor:
        """Return raw output rows [start, stop)."""
        if not 0 <= start < stop <= self.length:
            raise SizingError(
                f"Segment [{start}, {stop}) outside trajectory",
                required=stop,
                available=self.length,
            )
        return self.outputs[start:stop]


@dataclass
class SourceDataset:
    """Trajectories of N_s source systems."""

    trajectories: list[Trajectory]
    theta_range: tuple[float, float]
    seed: int

    def __post_init__(self) -> None:
        """Validate theta membership after initialization."""
        low, high = self.theta_range
        for index, trajectory in enumerate(self.trajectories):
            if not low <= trajectory.params.theta <= high:
                raise ConfigurationError(
                    "Trajectory theta outside dataset range",
                    config_key="theta",
                    config_value=trajectory.params.theta,
                    trajectory=index,
                    theta_range=self.theta_range,
                )

    def __len__(self) -> int:
        """Return N_s."""
        return len(self.trajectories)

    def summary(self) -> DatasetSummary:
        """Return counts and length statistics."""
        lengths = [t.length for t in self.trajectories] or [0]
        return {
            "n_systems": len(self.trajectories),
            "theta_low": float(self.theta_range[0]),
            "theta_high": float(self.theta_range[1]),
            "dt": self.trajectories[0].params.dt if self.trajectories else DEFAULT_DT,
            "min_length": int(min(lengths)),
            "max_length": int(max(lengths)),
            "mean_length": float(np.mean(lengths)),
        }


@dataclass(frozen=True)
class Standardizer:
    """Per-channel affine normalisation fitted on source outputs."""

    mean: tuple[float, ...]
    std: tuple[float, ...] = field(default=(1.0, 1.0))

    @classmethod
    def fit(cls, trajectories: list[Trajectory]) -> Standardizer:
        """Fit channel mean and standard deviation over all samples."""
        stacked = np.concatenate([t.outputs for t in trajectories], axis=0)
        std = stacked.std(axis=0)
        std[std == 0.0] = 1.0
        return cls(mean=tuple(stacked.mean(axis=0)), std=tuple(std))

    def transform(self, outputs: Tensor) -> Tensor:
        """Map raw outputs to standardized units."""
        return (outputs - np.asarray(self.mean)) / np.asarray(self.std)

    def inverse(self, outputs: Tensor) -> Tensor:
        """Map standardized outputs back to raw units."""
        return outputs * np.asarray(self.std) + np.asarray(self.mean)

    def apply(self, trajectory: Trajectory) -> Trajectory:
        """Return a standardized copy of `trajectory`."""
        return Trajectory(trajectory.params, self.transform(trajectory.outputs))


def sample_params(
    n_systems: int,
    theta_range: tuple[float, float],
    seed: int,
    dt: float = DEFAULT_DT,
    t_final_range: tuple[float, float] = (DEFAULT_T_FINAL_LOW, DEFAULT_T_FINAL_HIGH),
) -> list[SystemParams]:
    """Draw theta, x0 and final time for every source system."""
    rng = np.random.default_rng(seed)
    params = []
    for _ in range(n_systems):
        theta = float(rng.uniform(theta_range[0], theta_range[1]))
        x0 = rng.uniform(DEFAULT_X0_LOW, DEFAULT_X0_HIGH, size=2)
        t_final = float(rng.uniform(t_final_range[0], t_final_range[1]))
        params.append(
            SystemParams(theta=theta, x0=(x0[0], x0[1]), t_final=t_final, dt=dt)
        )
    return params


@performance_monitor("generate_source_dataset")
def generate_source_dataset(
    n_systems: int,
    theta_range: tuple[float, float],
    seed: int,
    dt: float = DEFAULT_DT,
    t_final_range: tuple[float, float] = (DEFAULT_T_FINAL_LOW, DEFAULT_T_FINAL_HIGH),
    workers: int = 1,
) -> SourceDataset:
    """Simulate `n_systems` source systems with uniformly drawn parameters.

    theta ~ U(theta_range), x0 ~ U([-1, 1]²), t_final ~ U(t_final_range). The
    result is a pure function of the arguments and `seed`; `workers` only
    changes how simulations are scheduled.

    Raises:
        ConfigurationError: if `n_systems < 1` or the theta range is inverted
    """
    if n_systems < 1:
        raise ConfigurationError(
            "n_systems must be at least 1",
            config_key="n_systems",
            config_value=n_systems,
        )
    low, high = theta_range
    if low > high:
        raise ConfigurationError(
            "theta_range low must not exceed high",
            config_key="theta_range",
            config_value=theta_range,
        )

    params = sample_params(n_systems, theta_range, seed, dt, t_final_range)
    trajectories = ordered_map(simulate, params, workers=workers)
    _LOGGER.info(
        "Generated %d source systems (theta in [%s, %s], seed=%d)",
        n_systems,
        low,
        high,
        seed,
    )
    return SourceDataset(
        trajectories=trajectories, theta_range=(float(low), float(high)), seed=seed
    )


def generate_query(
    theta: float = DEFAULT_QUERY_THETA,
    x0: tuple[float, float] = DEFAULT_QUERY_X0,
    t_final: float = DEFAULT_QUERY_T_FINAL,
    dt: float = DEFAULT_DT,
) -> Trajectory:
    """Simulate the query system; defaults give theta*=1.572 from [1, -0.5]."""
    return simulate(SystemParams(theta=theta, x0=x0, t_final=t_final, dt=dt))
