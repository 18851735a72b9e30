"""LSTM cell and stacked LSTM layers."""

from __future__ import annotations

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..exceptions import ModelError

LSTMState = tuple[Tensor, Tensor]


def add_lstm_params(params: ParameterSet, prefix: str, input_dim: int, hidden: int, rng: np.random.Generator) -> None:
    """Fused gate weights ``W`` of shape (input+hidden, 4·hidden), gate order i, f, g, o."""
    params.add_uniform(f"{prefix}.W", (input_dim + hidden, 4 * hidden), rng)
    params.add_uniform(f"{prefix}.b", (4 * hidden,), rng)


def lstm_step(graph: Graph, x: Tensor, h: Tensor, c: Tensor, prefix: str) -> LSTMState:
    weights = graph.param(f"{prefix}.W")
    hidden = h.shape[-1]
    if weights.shape[0] != x.shape[-1] + hidden or weights.shape[1] != 4 * hidden:
        raise ModelError(f"{prefix}: weights {weights.shape} do not fit input {x.shape} and hidden {h.shape}")
    if c.shape != h.shape:
        raise ModelError(f"{prefix}: cell state {c.shape} differs from hidden state {h.shape}")

    z = ops.concat([x, h]) @ weights + graph.param(f"{prefix}.b")
    i = ops.sigmoid(ops.slice_last(z, 0, hidden))
    f = ops.sigmoid(ops.slice_last(z, hidden, 2 * hidden))
    g = ops.tanh(ops.slice_last(z, 2 * hidden, 3 * hidden))
    o = ops.sigmoid(ops.slice_last(z, 3 * hidden, 4 * hidden))
    c_next = f * c + i * g
    h_next = o * ops.tanh(c_next)
    return h_next, c_next


def zero_state(graph: Graph, batch: int, hidden: int) -> LSTMState:
    return graph.constant(np.zeros((batch, hidden))), graph.constant(np.zeros((batch, hidden)))


def run_stack(
    graph: Graph,
    inputs: list[Tensor],
    prefixes: list[str],
    hidden: int,
) -> tuple[list[Tensor], list[LSTMState]]:
    """Run stacked layers over a sequence; returns top-layer outputs and final state per layer."""
    batch = inputs[0].shape[0]
    states = [zero_state(graph, batch, hidden) for _ in prefixes]
    outputs: list[Tensor] = []
    for x in inputs:
        layer_input = x
        for depth, prefix in enumerate(prefixes):
            h, c = lstm_step(graph, layer_input, *states[depth], prefix)
            states[depth] = (h, c)
            layer_input = h
        outputs.append(layer_input)
    return outputs, states
