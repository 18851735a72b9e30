"""Single-prediction baselines: feed-forward and stacked LSTM."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..exceptions import ModelError
from .base import SequenceModel, single_step_only
from .heads import add_head_params, head_logits
from .lstm import add_lstm_params, run_stack


class FeedForwardModel(SequenceModel):
    """Tanh layers over the flattened window of T̄·Q returns."""

    def init_params(self, rng: np.random.Generator) -> ParameterSet:
        params = ParameterSet()
        width = self.input_length * self.series_count
        for depth in range(int(self.config.layers)):  # type: ignore[arg-type]
            params.add_uniform(f"ffn.{depth}.W", (width, self.config.hidden), rng)
            params.add_uniform(f"ffn.{depth}.b", (self.config.hidden,), rng)
            width = self.config.hidden
        add_head_params(params, "head", width, self.series_count, self.num_classes, rng)
        return params

    def ffn_forward(self, graph: Graph, flat_inputs: np.ndarray) -> Tensor:
        x = np.asarray(flat_inputs, dtype=np.float64)
        expected = self.input_length * self.series_count
        if x.ndim != 2 or x.shape[1] != expected:
            raise ModelError(f"expected flattened inputs of width {expected}, got {x.shape}")
        h: Tensor = graph.constant(x)
        for depth in range(int(self.config.layers)):  # type: ignore[arg-type]
            h = ops.tanh(h @ graph.param(f"ffn.{depth}.W") + graph.param(f"ffn.{depth}.b"))
        return ops.softmax_last(head_logits(graph, h, "head", self.series_count))

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
        single_step_only(horizon, "ffn")
        x = self.check_inputs(inputs)
        return [self.ffn_forward(graph, x.reshape(x.shape[0], -1))]


class StackedLSTMModel(SequenceModel):
    """Stacked LSTM whose last hidden state feeds the per-series heads."""

    def _prefixes(self) -> list[str]:
        return [f"lstm.{depth}" for depth in range(int(self.config.layers))]  # type: ignore[arg-type]

    def init_params(self, rng: np.random.Generator) -> ParameterSet:
        params = ParameterSet()
        hidden = self.config.hidden
        for depth, prefix in enumerate(self._prefixes()):
            add_lstm_params(params, prefix, self.series_count if depth == 0 else hidden, hidden, rng)
        add_head_params(params, "head", hidden, self.series_count, self.num_classes, rng)
        return params

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
        single_step_only(horizon, "lstm")
        x = self.check_inputs(inputs)
        steps = [graph.constant(x[:, t, :]) for t in range(x.shape[1])]
        outputs, _ = run_stack(graph, steps, self._prefixes(), self.config.hidden)
        return [ops.softmax_last(head_logits(graph, outputs[-1], "head", self.series_count))]
