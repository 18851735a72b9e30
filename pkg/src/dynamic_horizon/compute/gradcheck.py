"""Central finite-difference gradient verification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..exceptions import NumericalError
from .params import ParameterSet
from .tensor import Graph, Tensor

LossBuilder = Callable[[Graph], Tensor]
GradHook = Callable[[ParameterSet], None]


@dataclass
class GradCheckResult:
    max_relative_error: float
    worst_parameter: str | None
    worst_index: tuple[int, ...] | None
    coordinates_checked: int


def analytic_gradients(loss_fn: LossBuilder, params: ParameterSet) -> dict[str, np.ndarray]:
    params.zero_grad()
    graph = Graph(params)
    graph.backward(loss_fn(graph))
    grads = {name: grad.copy() for name, grad in params.grads()}
    params.zero_grad()
    return grads


def evaluate_loss(loss_fn: LossBuilder, params: ParameterSet) -> float:
    return loss_fn(Graph(params, record=False)).item()


def _coordinates(
    shape: tuple[int, ...],
    per_parameter: int | None,
    rng: np.random.Generator | None,
) -> list[tuple[int, ...]]:
    every = list(np.ndindex(shape))
    if per_parameter is None or per_parameter >= len(every):
        return every
    rng = rng if rng is not None else np.random.default_rng(0)
    picked = np.sort(rng.choice(len(every), size=per_parameter, replace=False))
    return [every[i] for i in picked]


def finite_diff_report(
    loss_fn: LossBuilder,
    params: ParameterSet,
    eps: float = 1e-5,
    *,
    grad_hook: GradHook | None = None,
    per_parameter: int | None = None,
    rng: np.random.Generator | None = None,
) -> GradCheckResult:
    """Compare analytic gradients with central differences.

    The error per coordinate is ``|analytic - numeric| / max(1, |analytic|)``.
    ``grad_hook`` may edit the analytic gradients before comparison.
    ``per_parameter`` probes at most that many randomly drawn coordinates of
    each parameter instead of all of them.
    """
    params.zero_grad()
    graph = Graph(params)
    graph.backward(loss_fn(graph))
    if grad_hook is not None:
        grad_hook(params)
    analytic = {name: grad.copy() for name, grad in params.grads()}
    params.zero_grad()

    worst = 0.0
    worst_name: str | None = None
    worst_index: tuple[int, ...] | None = None
    checked = 0
    for name, value in params.items():
        for index in _coordinates(value.shape, per_parameter, rng):
            original = value[index]
            value[index] = original + eps
            plus = evaluate_loss(loss_fn, params)
            value[index] = original - eps
            minus = evaluate_loss(loss_fn, params)
            value[index] = original
            if not (np.isfinite(plus) and np.isfinite(minus)):
                raise NumericalError(f"non-finite loss probing {name}{list(index)}", where=f"{name}{list(index)}")
            numeric = (plus - minus) / (2.0 * eps)
            exact = float(analytic[name][index])
            error = abs(exact - numeric) / max(1.0, abs(exact))
            checked += 1
            if worst_name is None or error > worst:
                worst, worst_name, worst_index = error, name, tuple(int(i) for i in index)
    return GradCheckResult(worst, worst_name, worst_index, checked)


def finite_diff_check(
    loss_fn: LossBuilder,
    params: ParameterSet,
    eps: float = 1e-5,
    *,
    grad_hook: GradHook | None = None,
) -> float:
    """Max relative error between analytic and central-difference gradients."""
    return finite_diff_report(loss_fn, params, eps, grad_hook=grad_hook).max_relative_error
