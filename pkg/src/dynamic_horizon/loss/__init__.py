"""Confidence-thresholded loss and rollouts."""

from .confidence import confidence, confidence_value
from .dynamic import ConfidenceTrace, dynamic_loss, kl_onehot, static_loss, stop_indices, truncated_backward
from .masking import continuation_test, mask_weight, penalty
from .rollout import Rollout, dynamic_rollout, static_rollout

__all__ = [
    "ConfidenceTrace",
    "Rollout",
    "confidence",
    "confidence_value",
    "continuation_test",
    "dynamic_loss",
    "dynamic_rollout",
    "kl_onehot",
    "mask_weight",
    "penalty",
    "static_loss",
    "static_rollout",
    "stop_indices",
    "truncated_backward",
]
