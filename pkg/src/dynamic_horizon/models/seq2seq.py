"""LSTM encoder-decoder with optional additive attention and per-series heads."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..exceptions import ModelError
from .attention import AttentionResult, add_attention_params, attend, project_keys
from .base import SequenceModel
from .heads import add_head_params, head_logits
from .lstm import LSTMState, add_lstm_params, lstm_step, run_stack


@dataclass
class EncoderOutput:
    states: Tensor
    final: list[LSTMState]
    keys: Tensor | None


@dataclass
class DecoderStep:
    logits: Tensor
    probs: Tensor
    state: list[LSTMState]


class Seq2SeqModel(SequenceModel):
    def _prefixes(self, side: str) -> list[str]:
        return [f"{side}.{depth}" for depth in range(int(self.config.layers))]  # type: ignore[arg-type]

    def init_params(self, rng: np.random.Generator) -> ParameterSet:
        params = ParameterSet()
        hidden, q, classes = self.config.hidden, self.series_count, self.num_classes
        for depth, prefix in enumerate(self._prefixes("enc")):
            add_lstm_params(params, prefix, q if depth == 0 else hidden, hidden, rng)
        decoder_input = q * classes + (hidden if self.config.attention else 0)
        for depth, prefix in enumerate(self._prefixes("dec")):
            add_lstm_params(params, prefix, decoder_input if depth == 0 else hidden, hidden, rng)
        if self.config.attention:
            add_attention_params(params, hidden, rng)
        add_head_params(params, "head", hidden, q, classes, rng)
        return params

    def encode(self, graph: Graph, inputs: np.ndarray) -> EncoderOutput:
        x = self.check_inputs(inputs)
        steps = [graph.constant(x[:, t, :]) for t in range(x.shape[1])]
        outputs, final = run_stack(graph, steps, self._prefixes("enc"), self.config.hidden)
        states = ops.stack(outputs, axis=1)
        keys = project_keys(graph, states) if self.config.attention else None
        return EncoderOutput(states=states, final=final, keys=keys)

    def attend(self, graph: Graph, decoder_state: Tensor, encoded: EncoderOutput) -> AttentionResult:
        return attend(graph, decoder_state, encoded.states, encoded.keys)

    def decode_step(
        self,
        graph: Graph,
        prev: Tensor,
        state: list[LSTMState],
        context: Tensor | None,
    ) -> DecoderStep:
        width = self.series_count * self.num_classes
        if prev.value.ndim != 2 or prev.shape[1] != width:
            raise ModelError(f"decoder input must be (batch, {width}) one-hot blocks, got {prev.shape}")
        layer_input = ops.concat([prev, context]) if context is not None else prev
        new_state: list[LSTMState] = []
        for (h, c), prefix in zip(state, self._prefixes("dec")):
            h, c = lstm_step(graph, layer_input, h, c, prefix)
            new_state.append((h, c))
            layer_input = h
        logits = head_logits(graph, layer_input, "head", self.series_count)
        return DecoderStep(logits=logits, probs=ops.softmax_last(logits), state=new_state)

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
        horizon = horizon or self.max_horizon
        if horizon > self.max_horizon:
            raise ModelError(f"horizon {horizon} exceeds configured maximum {self.max_horizon}")
        if targets is not None:
            targets = np.asarray(targets, dtype=np.int64)
            if targets.ndim != 3 or targets.shape[1] < horizon:
                raise ModelError(f"teacher forcing needs (batch, >= {horizon}, series) targets, got {targets.shape}")
        if decoder_inputs is not None and len(decoder_inputs) < horizon:
            raise ModelError(f"{len(decoder_inputs)} decoder inputs for horizon {horizon}")

        encoded = self.encode(graph, inputs)
        state = encoded.final
        prev = decoder_inputs[0] if decoder_inputs is not None else self.one_hot_inputs(graph, first_labels)
        steps: list[Tensor] = []
        for t in range(horizon):
            context = self.attend(graph, state[-1][0], encoded).context if self.config.attention else None
            step = self.decode_step(graph, prev, state, context)
            steps.append(step.probs)
            state = step.state
            if t + 1 == horizon:
                break
            if decoder_inputs is not None:
                prev = decoder_inputs[t + 1]
            elif targets is not None:
                prev = self.one_hot_inputs(graph, targets[:, t, :])
            else:
                prev = self.one_hot_inputs(graph, np.argmax(step.probs.value, axis=-1))
        return steps

    def teacher_forced(
        self,
        graph: Graph,
        inputs: np.ndarray,
        first_labels: np.ndarray,
        targets: np.ndarray,
        horizon: int | None = None,
    ) -> list[Tensor]:
        """First input is the label of the last encoder step, then the ground truth of step t−1."""
        return self.distributions(graph, inputs, first_labels, horizon, targets=targets)
