"""Reverse-mode differentiation core."""

from .checkpoint import checkpoint_digest, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint
from .gradcheck import GradCheckResult, finite_diff_check, finite_diff_report
from .optim import OptimizerState, build_optimizer, optimizer_step
from .params import ParameterSet
from .tensor import Graph, Tensor

__all__ = [
    "GradCheckResult",
    "Graph",
    "OptimizerState",
    "ParameterSet",
    "Tensor",
    "build_optimizer",
    "checkpoint_digest",
    "decode_checkpoint",
    "encode_checkpoint",
    "finite_diff_check",
    "finite_diff_report",
    "load_checkpoint",
    "optimizer_step",
    "save_checkpoint",
]
