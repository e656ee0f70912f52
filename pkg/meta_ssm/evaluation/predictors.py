"""Per-method prediction with optional query adaptation."""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace

import numpy as np

from ..config.schemas import LayerSelector, MetaConfig
from ..const import META_METHODS, METHOD_XFER
from ..meta import AdaptedWeights, adapt_inference
from ..model import NeuralSSM, Regularization, extract_windows
from ..systems import Standardizer
from ..types import Tensor

_LOGGER = logging.getLogger(__name__)


def adapts(method: str) -> bool:
    """Whether `method` fine-tunes on the query context before predicting."""
    return method in META_METHODS or method == METHOD_XFER


@dataclass
class MethodPredictor:
    """A trained model evaluated the way its method prescribes.

    Meta methods adapt their selected layers, xfer adapts every layer and the
    remaining baselines predict without adaptation. Inputs and outputs are in
    raw units; a stored standardizer is applied around the model.

    Baselines fitted to a query context carry a `refit` callable, which
    receives each new context in training units and returns a model fitted
    to it.
    """

    method: str
    model: NeuralSSM
    meta: MetaConfig
    standardizer: Standardizer | None = None
    regularization: Regularization | None = None
    refit: Callable[[Tensor], NeuralSSM] | None = None

    def _scaled(self, outputs: Tensor) -> Tensor:
        if self.standardizer is None:
            return np.asarray(outputs, dtype=np.float64)
        return self.standardizer.transform(outputs)

    def adaptation_config(self) -> MetaConfig:
        """Meta config carrying this method's layer selector."""
        if self.method in META_METHODS:
            return self.meta.for_method(self.method)
        return replace(self.meta, selector=LayerSelector.ALL)

    def adapt(self, context: Tensor, steps: int) -> tuple[MethodPredictor, AdaptedWeights | None]:
        """Adapt on a raw context prefix; non-adapting methods return self.

        A predictor with `refit` is fitted afresh to the context instead.
        """
        if self.refit is not None:
            return replace(self, model=self.refit(self._scaled(context))), None
        if not adapts(self.method):
            return self, None
        windows = extract_windows(self._scaled(context), self.model.spec)
        adapted = adapt_inference(
            self.model, windows, steps, self.adaptation_config(), self.regularization
        )
        return replace(self, model=adapted.to_model(self.model)), adapted

    def rollout_predict(self, context: Tensor, horizon: int) -> Tensor:
        """Roll out from the end of a raw context prefix."""
        predicted = self.model.rollout_predict(self._scaled(context), horizon)
        if self.standardizer is None:
            return predicted
        return self.standardizer.inverse(predicted)
