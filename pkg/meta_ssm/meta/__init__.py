"""MAML/ANIL meta-training and inference-time adaptation."""

from .inner import (
    AdaptedWeights,
    LossFn,
    adapt_inference,
    context_loss_fn,
    gradient_steps,
    inner_adapt,
)
from .optimizers import Adam, GradientDescent, Optimizer, make_optimizer
from .outer import MetaGradient, Task, meta_gradient, outer_step, ssm_task
from .training import (
    CheckpointCallback,
    MetaTrainingResult,
    iteration_rng,
    meta_train,
    sample_tasks,
)

__all__ = [
    "Adam",
    "AdaptedWeights",
    "CheckpointCallback",
    "GradientDescent",
    "LossFn",
    "MetaGradient",
    "MetaTrainingResult",
    "Optimizer",
    "Task",
    "adapt_inference",
    "context_loss_fn",
    "gradient_steps",
    "inner_adapt",
    "iteration_rng",
    "make_optimizer",
    "meta_gradient",
    "meta_train",
    "outer_step",
    "sample_tasks",
    "ssm_task",
]
