"""Update rules for the outer loop and for supervised training."""

from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Mapping

import numpy as np

from ..config.schemas import OptimizerKind
from ..const import ADAM_BETA1, ADAM_BETA2, ADAM_EPSILON
from ..types import Tensor


class Optimizer(ABC):
    """Maps (parameters, gradients) to updated parameters."""

    def __init__(self, rate: float) -> None:
        """Initialize with a constant step size."""
        self.rate = rate

    @abstractmethod
    def step(
        self, parameters: Mapping[str, Tensor], grads: Mapping[str, Tensor]
    ) -> dict[str, Tensor]:
        """Return new parameter arrays; inputs are never modified."""


class GradientDescent(Optimizer):
    """ω ← ω − rate·g."""

    def step(
        self, parameters: Mapping[str, Tensor], grads: Mapping[str, Tensor]
    ) -> dict[str, Tensor]:
        """Take one plain gradient step."""
        return {
            name: value - self.rate * grads[name] if name in grads else value.copy()
            for name, value in parameters.items()
        }


class Adam(Optimizer):
    """Adaptive-moment update with bias correction."""

    def __init__(
        self,
        rate: float,
        beta1: float = ADAM_BETA1,
        beta2: float = ADAM_BETA2,
        epsilon: float = ADAM_EPSILON,
    ) -> None:
        """Initialize with empty moment estimates."""
        super().__init__(rate)
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.count = 0
        self._first: dict[str, Tensor] = {}
        self._second: dict[str, Tensor] = {}

    def step(
        self, parameters: Mapping[str, Tensor], grads: Mapping[str, Tensor]
    ) -> dict[str, Tensor]:
        """Take one adaptive-moment step."""
        self.count += 1
        correction1 = 1.0 - self.beta1**self.count
        correction2 = 1.0 - self.beta2**self.count
        updated = {}
        for name, value in parameters.items():
            grad = grads.get(name)
            if grad is None:
                updated[name] = value.copy()
                continue
            first = self.beta1 * self._first.get(name, np.zeros_like(grad)) + (
                1.0 - self.beta1
            ) * grad
            second = self.beta2 * self._second.get(name, np.zeros_like(grad)) + (
                1.0 - self.beta2
            ) * np.square(grad)
            self._first[name] = first
            self._second[name] = second
            step = (first / correction1) / (np.sqrt(second / correction2) + self.epsilon)
            updated[name] = value - self.rate * step
        return updated


def make_optimizer(kind: OptimizerKind | str, rate: float) -> Optimizer:
    """Build the optimizer named by `kind`."""
    if OptimizerKind(kind) is OptimizerKind.ADAM:
        return Adam(rate)
    return GradientDescent(rate)
