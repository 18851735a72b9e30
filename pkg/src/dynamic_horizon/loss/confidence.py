"""Confidence functions over per-series class distributions.

``maximum`` and ``confidence_distance`` read one distribution. The volatility
kinds ``total_variation`` and ``emd`` compare against the previous step and are
stored negated, so that larger always means more confident.
"""

from __future__ import annotations

import numpy as np

from ..compute import ops
from ..compute.tensor import Tensor
from ..constants import CONFIDENCE_KINDS, VOLATILITY_KINDS
from ..exceptions import LossError


def _check_kind(kind: str, has_previous: bool) -> None:
    if kind not in CONFIDENCE_KINDS:
        raise LossError(f"unknown confidence kind: {kind}")
    if kind in VOLATILITY_KINDS and not has_previous:
        raise LossError(f"{kind} needs the previous distribution")


def _top_two(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(-values, axis=-1, kind="stable")
    return order[..., 0], order[..., 1]


def confidence(kind: str, probs: Tensor, previous: Tensor | None = None) -> Tensor:
    """G for every leading index of ``probs`` (..., classes)."""
    _check_kind(kind, previous is not None)
    if kind == "maximum":
        return ops.max_last(probs)
    if kind == "confidence_distance":
        first, second = _top_two(probs.value)
        return ops.gather_last(probs, first) - ops.gather_last(probs, second)
    if previous.shape != probs.shape:  # type: ignore[union-attr]
        raise LossError(f"previous distribution {previous.shape} does not match {probs.shape}")  # type: ignore[union-attr]
    diff = probs - previous
    if kind == "total_variation":
        return -ops.max_last(ops.absolute(diff))
    # The last CDF entry is 1 - 1 and carries no mass.
    cdf = ops.slice_last(ops.cumsum_last(diff), 0, probs.shape[-1] - 1)
    return -ops.reduce_sum(ops.absolute(cdf), axis=-1)


def confidence_value(kind: str, probs: np.ndarray, previous: np.ndarray | None = None) -> np.ndarray:
    """Array counterpart of :func:`confidence` used at inference."""
    _check_kind(kind, previous is not None)
    p = np.asarray(probs, dtype=np.float64)
    if kind == "maximum":
        return p.max(axis=-1)
    if kind == "confidence_distance":
        ordered = np.sort(p, axis=-1)
        return ordered[..., -1] - ordered[..., -2]
    diff = p - np.asarray(previous, dtype=np.float64)
    if kind == "total_variation":
        return -np.abs(diff).max(axis=-1)
    return -np.abs(np.cumsum(diff, axis=-1)[..., :-1]).sum(axis=-1)
