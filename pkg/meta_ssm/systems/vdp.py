"""Van der Pol oscillator dynamics and fixed-step RK4 simulation."""

from __future__ import annotations

import logging
import math
from typing import TYPE_CHECKING

import numpy as np

from ..const import DIVERGENCE_THRESHOLD
from ..exceptions import DivergenceError, NumericError, ShapeError
from ..types import Tensor

if TYPE_CHECKING:
    from .dataset import SystemParams, Trajectory

_LOGGER = logging.getLogger(__name__)


def _rhs(x1: float, x2: float, theta: float) -> tuple[float, float]:
    return x2, theta * x2 * (1.0 - x1 * x1) - x1


def vdp_derivative(state: Tensor, theta: float) -> Tensor:
    """Return [x2, theta·x2·(1 − x1²) − x1].

    Raises:
        ShapeError: if `state` is not a 2-vector
        NumericError: if `state` or `theta` is not finite
    """
    state = np.asarray(state, dtype=np.float64)
    if state.shape != (2,):
        raise ShapeError(
            "State must be a 2-vector", op="vdp_derivative", shapes=[state.shape]
        )
    if not (np.all(np.isfinite(state)) and math.isfinite(theta)):
        raise NumericError(
            "Non-finite input to vdp_derivative", state=state.tolist(), theta=theta
        )
    return np.array(_rhs(float(state[0]), float(state[1]), theta))


def rk4_step(state: Tensor, theta: float, dt: float) -> Tensor:
    """Advance `state` by one classical Runge-Kutta step of size `dt`."""
    k1 = vdp_derivative(state, theta)
    k2 = vdp_derivative(state + 0.5 * dt * k1, theta)
    k3 = vdp_derivative(state + 0.5 * dt * k2, theta)
    k4 = vdp_derivative(state + dt * k3, theta)
    return state + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def step_count(t_final: float, dt: float) -> int:
    """Number of integration steps covering [0, t_final] at period dt."""
    return int(math.floor(t_final / dt + 1e-9))


def integrate(x0: Tensor, theta: float, dt: float, steps: int) -> Tensor:
    """Integrate from `x0` for `steps` RK4 steps; returns (steps + 1, 2) samples.

    Steps on Python floats; agrees with `rk4_step` to rounding.

    Raises:
        DivergenceError: if any state component exceeds the magnitude bound
    """
    out = np.empty((steps + 1, 2))
    x1, x2 = float(x0[0]), float(x0[1])
    out[0] = (x1, x2)
    half = 0.5 * dt
    sixth = dt / 6.0
    for step in range(1, steps + 1):
        a1, a2 = _rhs(x1, x2, theta)
        b1, b2 = _rhs(x1 + half * a1, x2 + half * a2, theta)
        c1, c2 = _rhs(x1 + half * b1, x2 + half * b2, theta)
        d1, d2 = _rhs(x1 + dt * c1, x2 + dt * c2, theta)
        x1 += sixth * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        x2 += sixth * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        magnitude = max(abs(x1), abs(x2))
        if not magnitude <= DIVERGENCE_THRESHOLD:
            raise DivergenceError(
                "Simulation diverged",
                step=step,
                magnitude=magnitude,
                theta=theta,
            )
        out[step] = (x1, x2)
    return out


def simulate(params: SystemParams) -> Trajectory:
    """Simulate one van der Pol realization sampled at every RK4 step.

    The first output equals `params.x0`; the trajectory holds
    floor(t_final / dt) + 1 samples.
    """
    from .dataset import Trajectory

    steps = step_count(params.t_final, params.dt)
    outputs = integrate(np.asarray(params.x0), params.theta, params.dt, steps)
    _LOGGER.debug(
        "Simulated theta=%.4f for %d steps (dt=%s)", params.theta, steps, params.dt
    )
    return Trajectory(params=params, outputs=outputs)
