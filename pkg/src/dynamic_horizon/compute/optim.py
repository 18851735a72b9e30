"""SGD and Adam over a :class:`ParameterSet`."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from ..exceptions import ConfigError, ShapeError
from .params import ParameterSet

OptimizerKind = Literal["sgd", "adam"]


@dataclass
class OptimizerState:
    kind: OptimizerKind
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step_count: int = 0
    first_moment: dict[str, np.ndarray] = field(default_factory=dict)
    second_moment: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("sgd", "adam"):
            raise ConfigError(f"unknown optimizer kind: {self.kind}")
        if self.lr <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.lr}")


def build_optimizer(kind: OptimizerKind, lr: float, **hyper: float) -> OptimizerState:
    return OptimizerState(kind=kind, lr=float(lr), **hyper)


def optimizer_step(state: OptimizerState, params: ParameterSet) -> ParameterSet:
    """Apply one update from the accumulated gradients, then clear them."""
    state.step_count += 1
    if state.kind == "sgd":
        for name, value in params.items():
            value -= state.lr * params.grad(name)
        params.zero_grad()
        return params

    bc1 = 1.0 - state.beta1**state.step_count
    bc2 = 1.0 - state.beta2**state.step_count
    for name, value in params.items():
        g = params.grad(name)
        m = state.first_moment.get(name)
        v = state.second_moment.get(name)
        if m is None or v is None:
            m = state.first_moment[name] = np.zeros_like(value)
            v = state.second_moment[name] = np.zeros_like(value)
        if m.shape != value.shape:
            raise ShapeError("adam", m.shape, value.shape, detail=name)
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        value -= state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    params.zero_grad()
    return params
