"""Additive attention: score_i = v · tanh(W_query s + W_key h_i)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..exceptions import ModelError

PREFIX = "att"


@dataclass
class AttentionResult:
    context: Tensor
    weights: Tensor


def add_attention_params(params: ParameterSet, hidden: int, rng: np.random.Generator) -> None:
    params.add_uniform(f"{PREFIX}.W_query", (hidden, hidden), rng)
    params.add_uniform(f"{PREFIX}.W_key", (hidden, hidden), rng)
    params.add_uniform(f"{PREFIX}.v", (hidden, 1), rng)


def project_keys(graph: Graph, encoder_states: Tensor) -> Tensor:
    """W_key h_i for every encoder step, computed once per sequence."""
    return encoder_states @ graph.param(f"{PREFIX}.W_key")


def attend(graph: Graph, decoder_state: Tensor, encoder_states: Tensor, keys: Tensor | None = None) -> AttentionResult:
    """Weighted sum of ``encoder_states`` (batch, steps, hidden) under softmax scores."""
    if encoder_states.value.ndim != 3 or encoder_states.shape[1] == 0:
        raise ModelError(f"attention needs (batch, steps, hidden) encoder states, got {encoder_states.shape}")
    batch, steps, hidden = encoder_states.shape
    if keys is None:
        keys = project_keys(graph, encoder_states)
    query = ops.reshape(decoder_state @ graph.param(f"{PREFIX}.W_query"), (batch, 1, hidden))
    scores = ops.tanh(query + keys) @ graph.param(f"{PREFIX}.v")
    weights = ops.softmax_last(ops.reshape(scores, (batch, steps)))
    context = ops.reduce_sum(ops.reshape(weights, (batch, steps, 1)) * encoder_states, axis=1)
    return AttentionResult(context=context, weights=weights)
