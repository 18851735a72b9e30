"""Continuation test, mask weights and the rectified penalty."""

from __future__ import annotations

import numpy as np

from ..compute import ops
from ..compute.ops import stable_sigmoid
from ..compute.tensor import Tensor
from ..config import DynamicLossConfig


def continuation_test(g: float | np.ndarray, config: DynamicLossConfig) -> bool | np.ndarray:
    """True where G ≥ θ; a tie continues."""
    result = np.asarray(g, dtype=np.float64) >= config.threshold
    return bool(result) if result.ndim == 0 else result


def mask_weight(g: float | np.ndarray, config: DynamicLossConfig) -> float | np.ndarray:
    values = np.asarray(g, dtype=np.float64)
    if config.mask == "indicator":
        weight = (values >= config.threshold).astype(np.float64)
    else:
        weight = stable_sigmoid(config.k * (values - config.threshold) / config.sigmoid_scale)
    return float(weight) if weight.ndim == 0 else weight


def penalty(g: float | np.ndarray, config: DynamicLossConfig) -> float | np.ndarray:
    values = config.lam * np.maximum(config.threshold - np.asarray(g, dtype=np.float64), 0.0)
    return float(values) if values.ndim == 0 else values


def mask_weight_tensor(g: Tensor, config: DynamicLossConfig) -> Tensor:
    """Sigmoid weight as a differentiable node."""
    return ops.sigmoid(ops.scale(g - config.threshold, config.k / config.sigmoid_scale))


def penalty_tensor(g: Tensor, config: DynamicLossConfig) -> Tensor:
    """λ·max(θ − G, 0) with zero slope at θ."""
    return ops.scale(ops.maximum(ops.sub(config.threshold, g), 0.0), config.lam)
