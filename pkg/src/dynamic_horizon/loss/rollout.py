"""Inference rollouts: confidence-stopped and fixed-length."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph
from ..config import DynamicLossConfig
from ..models.base import SequenceModel
from .confidence import confidence_value
from .dynamic import stop_indices


@dataclass
class Rollout:
    """``labels`` is (batch, series, steps); entries past ``lengths`` are -1."""

    labels: np.ndarray
    lengths: np.ndarray
    confidences: np.ndarray
    probabilities: np.ndarray

    def emitted(self) -> list[tuple[int, int, int, int]]:
        """(sample, series, step, label) for every emitted prediction."""
        rows = []
        for b, q in np.ndindex(self.lengths.shape):
            for t in range(int(self.lengths[b, q])):
                rows.append((b, q, t, int(self.labels[b, q, t])))
        return rows


def _decode(
    model: SequenceModel,
    params: ParameterSet,
    inputs: np.ndarray,
    first_labels: np.ndarray,
    horizon: int,
    forced_labels: np.ndarray | None,
) -> np.ndarray:
    graph = Graph(params, record=False)
    steps = model.distributions(graph, inputs, first_labels, horizon, targets=forced_labels)
    # (batch, series, steps, classes)
    return np.stack([p.value for p in steps], axis=2)


def dynamic_rollout(
    model: SequenceModel,
    params: ParameterSet,
    inputs: np.ndarray,
    first_labels: np.ndarray,
    config: DynamicLossConfig,
    *,
    forced_labels: np.ndarray | None = None,
) -> Rollout:
    """Decode ``config.horizon`` steps and stop each series at its first G < θ.

    The hard threshold applies under both masking modes. ``forced_labels``
    replaces the self-fed decoder inputs with teacher forcing.
    """
    probs = _decode(model, params, inputs, first_labels, config.horizon, forced_labels)
    previous = ops.one_hot(first_labels, probs.shape[-1])
    g_steps = []
    for t in range(probs.shape[2]):
        current = probs[:, :, t, :]
        g_steps.append(confidence_value(config.confidence, current, previous if config.is_volatility else None))
        previous = current
    confidences = np.stack(g_steps, axis=-1)
    lengths = stop_indices(confidences, config.threshold)
    labels = np.argmax(probs, axis=-1)
    labels = np.where(np.arange(labels.shape[-1]) < lengths[..., None], labels, -1)
    return Rollout(labels=labels, lengths=lengths, confidences=confidences, probabilities=probs)


def static_rollout(
    model: SequenceModel,
    params: ParameterSet,
    inputs: np.ndarray,
    first_labels: np.ndarray,
    horizon: int,
) -> Rollout:
    """Always emit ``horizon`` argmax predictions per series."""
    probs = _decode(model, params, inputs, first_labels, horizon, None)
    batch, series = probs.shape[:2]
    return Rollout(
        labels=np.argmax(probs, axis=-1),
        lengths=np.full((batch, series), horizon, dtype=np.int64),
        confidences=probs.max(axis=-1),
        probabilities=probs,
    )
