"""Preset toy problems with analytic answers."""

from __future__ import annotations

import numpy as np

from meta_ssm.autodiff import constant, reduce_sum, square, sub
from meta_ssm.meta import Task


def quadratic_loss(center: float):
    """Loss (w - c)² summed over a scalar-like (1,) weight named "w"."""

    def loss_fn(weights):
        return reduce_sum(square(sub(weights["w"], constant(np.array([center])))))

    return loss_fn


class ToyTasks:
    """Tasks over a single weight "w" whose meta-gradients are known in closed form.

    With context and target loss (w - c)² and one inner step at rate β the
    adapted weight is w(1 - 2β) + 2βc. The second-order task gradient is
    2(1 - 2β)²(w - c) and the first-order one is 2(1 - 2β)(w - c).
    """

    @staticmethod
    def quadratic(name: str, center: float) -> Task:
        """Context and target share the same quadratic."""
        return Task(
            name=name,
            context_loss=quadratic_loss(center),
            target_loss=quadratic_loss(center),
        )

    @staticmethod
    def symmetric_pair() -> list[Task]:
        """Centers +1 and -1."""
        return [ToyTasks.quadratic("plus", 1.0), ToyTasks.quadratic("minus", -1.0)]
