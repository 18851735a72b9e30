"""Named trainable parameters with paired gradient accumulators."""

from __future__ import annotations

from typing import Iterator

import numpy as np

from ..constants import INIT_SCALE
from ..exceptions import ShapeError, UsageError


class ParameterSet:
    """Ordered map name -> float64 array, each with a same-shape gradient."""

    def __init__(self) -> None:
        self._values: dict[str, np.ndarray] = {}
        self._grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value: np.ndarray) -> np.ndarray:
        if name in self._values:
            raise UsageError(f"duplicate parameter name: {name}")
        array = np.array(value, dtype=np.float64, copy=True)
        self._values[name] = array
        self._grads[name] = np.zeros_like(array)
        return array

    def add_uniform(
        self,
        name: str,
        shape: tuple[int, ...],
        rng: np.random.Generator,
        scale: float = INIT_SCALE,
    ) -> np.ndarray:
        return self.add(name, rng.uniform(-scale, scale, size=shape))

    def add_zeros(self, name: str, shape: tuple[int, ...]) -> np.ndarray:
        return self.add(name, np.zeros(shape, dtype=np.float64))

    def value(self, name: str) -> np.ndarray:
        try:
            return self._values[name]
        except KeyError:
            raise UsageError(f"unknown parameter: {name}") from None

    def grad(self, name: str) -> np.ndarray:
        try:
            return self._grads[name]
        except KeyError:
            raise UsageError(f"unknown parameter: {name}") from None

    def set_value(self, name: str, value: np.ndarray) -> None:
        current = self.value(name)
        array = np.asarray(value, dtype=np.float64)
        if array.shape != current.shape:
            raise ShapeError("set_value", array.shape, current.shape, detail=name)
        current[...] = array

    def accumulate(self, name: str, grad: np.ndarray) -> None:
        target = self.grad(name)
        if grad.shape != target.shape:
            raise ShapeError("accumulate", grad.shape, target.shape, detail=name)
        target += grad

    def zero_grad(self) -> None:
        for grad in self._grads.values():
            grad.fill(0.0)

    def names(self) -> list[str]:
        return list(self._values)

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._values.items())

    def grads(self) -> Iterator[tuple[str, np.ndarray]]:
        return iter(self._grads.items())

    def __contains__(self, name: object) -> bool:
        return name in self._values

    def __len__(self) -> int:
        return len(self._values)

    def size(self) -> int:
        """Total number of scalar parameters."""
        return int(sum(value.size for value in self._values.values()))

    def clone(self) -> "ParameterSet":
        """Deep copy of values; gradients start at zero."""
        copy = ParameterSet()
        for name, value in self._values.items():
            copy.add(name, value)
        return copy

    def load_from(self, other: "ParameterSet") -> None:
        """Overwrite values in place from a same-layout parameter set."""
        if other.names() != self.names():
            raise UsageError("parameter layouts differ")
        for name, value in other.items():
            self.set_value(name, value)

    def digest(self) -> str:
        """SHA-256 of the checkpoint encoding."""
        from .checkpoint import checkpoint_digest

        return checkpoint_digest(self)
