"""Dynamic-horizon loss assembly and its static counterpart."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Tensor
from ..config import DynamicLossConfig
from ..exceptions import LossError
from .confidence import confidence
from .masking import mask_weight_tensor, penalty_tensor

_SUM_TOLERANCE = 1e-9


@dataclass
class ConfidenceTrace:
    """Per sample and series: G and KL per step, plus the stop index t̄."""

    confidences: np.ndarray
    kl: np.ndarray
    stop_index: np.ndarray
    weights: np.ndarray = field(default_factory=lambda: np.zeros(0))
    penalties: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def horizon(self) -> int:
        return int(self.confidences.shape[-1])


def kl_onehot(probs: Tensor, labels: np.ndarray) -> Tensor:
    """KL(one-hot ‖ p) = −log max(p_j, 1e-12) for each leading index."""
    idx = np.asarray(labels, dtype=np.int64)
    classes = probs.shape[-1]
    if idx.shape != probs.shape[:-1]:
        raise LossError(f"labels {idx.shape} do not match distributions {probs.shape}")
    if idx.size and (idx.min() < 0 or idx.max() >= classes):
        raise LossError(f"class index outside 0..{classes - 1}")
    return -ops.log(ops.gather_last(probs, idx))


def stop_indices(confidences: np.ndarray, threshold: float) -> np.ndarray:
    """Steps kept before the first G < θ, or the full horizon if none."""
    violated = np.asarray(confidences) < threshold
    first = np.argmax(violated, axis=-1)
    return np.where(violated.any(axis=-1), first, violated.shape[-1]).astype(np.int64)


def _check_distributions(distributions: Sequence[Tensor]) -> None:
    for t, probs in enumerate(distributions):
        value = probs.value
        if value.ndim != 3:
            raise LossError(f"step {t + 1}: expected (batch, series, classes), got {value.shape}")
        if np.any(value < 0) or np.any(np.abs(value.sum(axis=-1) - 1.0) > _SUM_TOLERANCE):
            raise LossError(f"step {t + 1}: not a probability distribution")


def _check_labels(labels: np.ndarray, distributions: Sequence[Tensor]) -> np.ndarray:
    y = np.asarray(labels, dtype=np.int64)
    batch, series = distributions[0].shape[:2]
    if y.ndim != 3 or y.shape[0] != batch or y.shape[2] != series or y.shape[1] < len(distributions):
        raise LossError(f"labels {y.shape} do not cover {len(distributions)} steps of ({batch}, {series})")
    return y


def dynamic_loss(
    distributions: Sequence[Tensor],
    labels: np.ndarray,
    config: DynamicLossConfig,
    first_labels: np.ndarray | None = None,
) -> tuple[Tensor, ConfidenceTrace]:
    """Masked KL plus penalty, averaged over the batch.

    ``labels`` is (batch, steps, series). ``first_labels`` (batch, series) is the
    label fed as the first decoder input; it stands in for the previous
    distribution at step 1 for the volatility kinds.
    """
    if len(distributions) != config.horizon:
        raise LossError(f"{len(distributions)} steps for horizon {config.horizon}")
    _check_distributions(distributions)
    y = _check_labels(labels, distributions)
    graph = distributions[0].graph
    batch, _, classes = distributions[0].shape

    previous: Tensor | None = None
    if config.is_volatility:
        if first_labels is None:
            raise LossError(f"{config.confidence} needs the first decoder labels")
        previous = graph.constant(ops.one_hot(first_labels, classes))

    g_steps: list[Tensor] = []
    kl_steps: list[Tensor] = []
    for t, probs in enumerate(distributions):
        g_steps.append(confidence(config.confidence, probs, previous))
        kl_steps.append(kl_onehot(probs, y[:, t, :]))
        previous = probs

    g_values = np.stack([g.value for g in g_steps], axis=-1)
    stop = stop_indices(g_values, config.threshold)

    terms: list[Tensor] = []
    weights: list[np.ndarray] = []
    penalties: list[np.ndarray] = []
    for t, (g, kl) in enumerate(zip(g_steps, kl_steps)):
        pen = penalty_tensor(g, config)
        if config.mask == "indicator":
            kept = (t < stop).astype(np.float64)
            terms.append(kl * kept + pen * (1.0 - kept))
            weights.append(kept)
            penalties.append(pen.value * (1.0 - kept))
        else:
            weight = mask_weight_tensor(g, config)
            terms.append(weight * kl + pen)
            weights.append(weight.value)
            penalties.append(pen.value)

    total = ops.reduce_sum(ops.stack(terms, axis=-1))
    loss = ops.scale(total, 1.0 / batch)
    trace = ConfidenceTrace(
        confidences=g_values,
        kl=np.stack([kl.value for kl in kl_steps], axis=-1),
        stop_index=stop,
        weights=np.stack(weights, axis=-1),
        penalties=np.stack(penalties, axis=-1),
    )
    return loss, trace


def static_loss(distributions: Sequence[Tensor], labels: np.ndarray, horizon: int | None = None) -> Tensor:
    """Unmasked KL summed over series and the first ``horizon`` steps, averaged over the batch."""
    horizon = horizon or len(distributions)
    if horizon > len(distributions):
        raise LossError(f"horizon {horizon} exceeds {len(distributions)} emitted steps")
    steps = list(distributions[:horizon])
    _check_distributions(steps)
    y = _check_labels(labels, steps)
    kl = [kl_onehot(probs, y[:, t, :]) for t, probs in enumerate(steps)]
    return ops.scale(ops.reduce_sum(ops.stack(kl, axis=-1)), 1.0 / steps[0].shape[0])


def truncated_backward(loss: Tensor) -> ParameterSet:
    """Backpropagate with every t̄ held fixed.

    The stop indices enter :func:`dynamic_loss` only as constant masks, so no
    gradient flows through them.
    """
    loss.graph.params.zero_grad()
    return loss.graph.backward(loss)
