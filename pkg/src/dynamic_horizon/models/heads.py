"""One 5-way softmax head per series."""

from __future__ import annotations

import numpy as np

from ..compute import ops
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor


def add_head_params(
    params: ParameterSet,
    prefix: str,
    input_dim: int,
    series_count: int,
    num_classes: int,
    rng: np.random.Generator,
) -> None:
    for q in range(series_count):
        params.add_uniform(f"{prefix}.{q}.W", (input_dim, num_classes), rng)
        params.add_uniform(f"{prefix}.{q}.b", (num_classes,), rng)


def head_logits(graph: Graph, features: Tensor, prefix: str, series_count: int) -> Tensor:
    """Logits of shape (batch, series, classes) from disjoint per-series affine maps."""
    per_series = [features @ graph.param(f"{prefix}.{q}.W") + graph.param(f"{prefix}.{q}.b") for q in range(series_count)]
    return ops.stack(per_series, axis=1)
