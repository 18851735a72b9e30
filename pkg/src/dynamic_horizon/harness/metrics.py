"""Macro F1 over emitted predictions and rollout summaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..constants import NUM_CLASSES
from ..exceptions import HarnessError


def f1_macro(
    predictions: np.ndarray,
    truths: np.ndarray,
    emitted: np.ndarray,
    num_classes: int = NUM_CLASSES,
) -> float | None:
    """Unweighted mean of one-vs-rest F1 over (series, class) cells.

    Arrays are (samples, series, steps). Only ``emitted`` entries count; a cell
    whose class appears in neither truths nor predictions is left out. Returns
    ``None`` when nothing was emitted.
    """
    pred = np.asarray(predictions)
    true = np.asarray(truths)
    mask = np.asarray(emitted, dtype=bool)
    if pred.shape != true.shape or mask.shape != pred.shape:
        raise HarnessError(f"shape mismatch: predictions {pred.shape}, truths {true.shape}, mask {mask.shape}")
    if not mask.any():
        return None
    scores: list[float] = []
    for q in range(pred.shape[1]):
        p = pred[:, q, :][mask[:, q, :]]
        t = true[:, q, :][mask[:, q, :]]
        for c in range(num_classes):
            tp = int(np.sum((p == c) & (t == c)))
            fp = int(np.sum((p == c) & (t != c)))
            fn = int(np.sum((p != c) & (t == c)))
            if tp + fp + fn == 0:
                continue
            scores.append(2.0 * tp / (2.0 * tp + fp + fn))
    return float(np.mean(scores))


@dataclass
class EvaluationSummary:
    f1: float | None
    avg_len: float
    coverage: float
    per_series_avg_len: list[float] = field(default_factory=list)


def summarize(labels: np.ndarray, lengths: np.ndarray, targets: np.ndarray) -> EvaluationSummary:
    """``labels`` (samples, series, steps) with -1 past ``lengths``; ``targets`` (samples, steps, series)."""
    steps = labels.shape[-1]
    truths = np.transpose(np.asarray(targets)[:, :steps, :], (0, 2, 1))
    emitted = np.arange(steps)[None, None, :] < lengths[..., None]
    return EvaluationSummary(
        f1=f1_macro(labels, truths, emitted),
        avg_len=float(lengths.mean()) if lengths.size else 0.0,
        coverage=float((lengths > 0).mean()) if lengths.size else 0.0,
        per_series_avg_len=[float(v) for v in lengths.mean(axis=0)] if lengths.size else [],
    )
