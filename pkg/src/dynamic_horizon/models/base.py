"""Common surface of the forecasting architectures."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Sequence

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..config import ModelConfig
from ..exceptions import ModelError


class SequenceModel(ABC):
    """Maps an encoder window to per-step, per-series class distributions."""

    def __init__(self, config: ModelConfig) -> None:
        if config.series_count is None or config.input_length is None or config.layers is None:
            config = config.resolved()
        self.config = config

    @property
    def series_count(self) -> int:
        return int(self.config.series_count)  # type: ignore[arg-type]

    @property
    def num_classes(self) -> int:
        return self.config.num_classes

    @property
    def input_length(self) -> int:
        return int(self.config.input_length)  # type: ignore[arg-type]

    @property
    def max_horizon(self) -> int:
        return self.config.max_horizon

    @abstractmethod
    def init_params(self, rng: np.random.Generator) -> ParameterSet:
        """Fresh parameters, uniform in [-0.08, 0.08]."""

    @abstractmethod
    def distributions(
        self,
        graph: Graph,
        inputs: np.ndarray,
        first_labels: np.ndarray,
        horizon: int | None = None,
        *,
        targets: np.ndarray | None = None,
        decoder_inputs: Sequence[Tensor] | None = None,
    ) -> list[Tensor]:
        """Distributions of shape (batch, series, classes), one per step.

        ``targets`` switches on teacher forcing; otherwise the decoder is fed
        the one-hot argmax of its previous output. ``decoder_inputs`` pins
        every decoder input explicitly.
        """

    def check_inputs(self, inputs: np.ndarray) -> np.ndarray:
        x = np.asarray(inputs, dtype=np.float64)
        expected = (self.input_length, self.series_count)
        if x.ndim != 3 or x.shape[1:] != expected:
            raise ModelError(f"expected inputs of shape (batch, {expected[0]}, {expected[1]}), got {x.shape}")
        return x

    def one_hot_inputs(self, graph: Graph, labels: np.ndarray) -> Tensor:
        """Per-series one-hot blocks concatenated into (batch, series·classes)."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 2 or labels.shape[1] != self.series_count:
            raise ModelError(f"expected labels of shape (batch, {self.series_count}), got {labels.shape}")
        blocks = ops.one_hot(labels, self.num_classes)
        return graph.constant(blocks.reshape(labels.shape[0], -1))


def single_step_only(horizon: int | None, kind: str) -> None:
    if horizon not in (None, 1):
        raise ModelError(f"{kind} emits a single prediction step, horizon {horizon} requested")
