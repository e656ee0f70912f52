"""Long-horizon rollout evaluation on a query trajectory."""

from __future__ import annotations

import logging
from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from ..exceptions import SizingError
from ..systems import Trajectory
from ..types import Predictor, Tensor
from .metrics import SSECurve

_LOGGER = logging.getLogger(__name__)

# Builds the predictor to roll out from a raw context prefix
Adapter = Callable[[Tensor], Predictor]


@dataclass(frozen=True)
class RolloutResult:
    """Prediction, ground truth and the cumulative SSE between them."""

    curve: SSECurve
    predicted: Tensor
    truth: Tensor

    @property
    def sse(self) -> float:
        """Total SSE over the horizon."""
        return self.curve.total


def evaluate_rollout(
    predictor: Predictor,
    query: Trajectory | Tensor,
    context_points: int,
    horizon: int,
    adapter: Adapter | None = None,
) -> RolloutResult:
    """Score a rollout from the first `context_points` samples of `query`.

    When `adapter` is given it is called with the context prefix and the
    predictor it returns is used instead of `predictor`.

    Raises:
        SizingError: if the query holds fewer than context + horizon samples
    """
    outputs = query.outputs if isinstance(query, Trajectory) else np.asarray(query)
    required = context_points + horizon
    if outputs.shape[0] < required:
        raise SizingError(
            f"Query of {outputs.shape[0]} samples cannot cover "
            f"{context_points} context and {horizon} horizon points",
            required=required,
            available=outputs.shape[0],
        )
    context = outputs[:context_points]
    truth = outputs[context_points:required]
    if adapter is not None:
        predictor = adapter(context)
    predicted = predictor.rollout_predict(context, horizon)
    curve = SSECurve.from_blocks(predicted, truth)
    _LOGGER.debug(
        "Rollout of %d steps from %d context points: SSE %.6g",
        horizon,
        context_points,
        curve.total,
    )
    return RolloutResult(curve=curve, predicted=predicted, truth=truth)


def compare_rollouts(
    predictors: Mapping[str, Predictor],
    query: Trajectory,
    context_points: int,
    horizon: int,
    adapters: Mapping[str, Adapter] | None = None,
) -> dict[str, RolloutResult]:
    """Evaluate several methods on one query, in the given method order."""
    adapters = adapters or {}
    results = {
        method: evaluate_rollout(
            predictor, query, context_points, horizon, adapters.get(method)
        )
        for method, predictor in predictors.items()
    }
    for method, result in results.items():
        _LOGGER.info("%s: SSE %.6g over %d steps", method, result.sse, horizon)
    return results
