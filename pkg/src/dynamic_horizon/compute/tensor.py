"""Tape-based reverse-mode differentiation over float64 arrays.

A :class:`Graph` owns a tape of :class:`Tensor` nodes in creation order, which
is already a topological order, so ``backward`` is one reversed sweep.
Parameter leaves read from and accumulate into a :class:`ParameterSet`.
"""

from __future__ import annotations

from typing import Any, Callable, Sequence

import numpy as np

from ..exceptions import NumericalError, ShapeError, UsageError
from .params import ParameterSet

BackwardFn = Callable[[np.ndarray], Sequence[np.ndarray | None]]


class Tensor:
    """One node of a recorded forward pass."""

    __slots__ = ("value", "graph", "parents", "backward_fn", "requires_grad", "grad", "param_name", "op", "_index")

    def __init__(
        self,
        value: np.ndarray,
        graph: "Graph",
        *,
        parents: tuple["Tensor", ...] = (),
        backward_fn: BackwardFn | None = None,
        requires_grad: bool = False,
        param_name: str | None = None,
        op: str = "leaf",
    ) -> None:
        self.value = value
        self.graph = graph
        self.parents = parents
        self.backward_fn = backward_fn
        self.requires_grad = requires_grad
        self.grad: np.ndarray | None = None
        self.param_name = param_name
        self.op = op
        self._index: int | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def numpy(self) -> np.ndarray:
        return self.value

    def item(self) -> float:
        if self.value.size != 1:
            raise ShapeError("item", self.value.shape, detail="expected a single value")
        return float(self.value.reshape(-1)[0])

    def __repr__(self) -> str:
        return f"Tensor(op={self.op}, shape={self.shape})"

    def __add__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.add(self, other)

    __radd__ = __add__

    def __sub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(self, other)

    def __rsub__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.sub(other, self)

    def __mul__(self, other: Any) -> "Tensor":
        from . import ops

        return ops.mul(self, other)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        from . import ops

        return ops.neg(self)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from . import ops

        return ops.matmul(self, other)


class Graph:
    """Records forward operations and runs the reverse sweep.

    ``record=False`` builds an inference graph: values are computed but no
    backward closures are kept.
    """

    def __init__(self, params: ParameterSet | None = None, *, record: bool = True) -> None:
        self.params = params if params is not None else ParameterSet()
        self.record = record
        self.tape: list[Tensor] = []
        self._param_leaves: dict[str, Tensor] = {}
        self._input_leaves: list[Tensor] = []

    def param(self, name: str) -> Tensor:
        """Leaf bound to a named parameter; one leaf per name per graph."""
        leaf = self._param_leaves.get(name)
        if leaf is None:
            value = self.params.value(name)
            leaf = Tensor(value, self, requires_grad=self.record, param_name=name, op="param")
            self._param_leaves[name] = leaf
        return leaf

    def input(self, value: Any, *, requires_grad: bool = False) -> Tensor:
        """Leaf for data; with ``requires_grad`` it collects ``.grad`` after backward."""
        array = np.array(value, dtype=np.float64)
        leaf = Tensor(array, self, requires_grad=requires_grad and self.record, op="input")
        if leaf.requires_grad:
            self._input_leaves.append(leaf)
        return leaf

    def constant(self, value: Any) -> Tensor:
        return Tensor(np.asarray(value, dtype=np.float64), self, op="constant")

    def lift(self, value: Any) -> Tensor:
        if isinstance(value, Tensor):
            if value.graph is not self:
                raise UsageError("tensor belongs to a different graph")
            return value
        return self.constant(value)

    def emit(
        self,
        op: str,
        value: np.ndarray,
        parents: tuple[Tensor, ...],
        backward_fn: BackwardFn,
    ) -> Tensor:
        """Create a node for ``op`` and put it on the tape when it needs gradients."""
        if not np.all(np.isfinite(value)):
            raise NumericalError(f"{op}: produced non-finite values", where=op)
        needs_grad = self.record and any(parent.requires_grad for parent in parents)
        node = Tensor(
            value,
            self,
            parents=parents if needs_grad else (),
            backward_fn=backward_fn if needs_grad else None,
            requires_grad=needs_grad,
            op=op,
        )
        if needs_grad:
            node._index = len(self.tape)
            self.tape.append(node)
        return node

    def backward(self, output: Tensor, seed: Any = None) -> ParameterSet:
        """Accumulate d(output)/d(param) into ``params`` gradients.

        Parameters not reachable from ``output`` keep their (zero) gradient.
        """
        if not self.record:
            raise UsageError("backward on an inference graph (record=False)")
        if output.graph is not self:
            raise UsageError("output belongs to a different graph")
        if output._index is None:
            raise UsageError("backward before forward: output was not produced by a recorded operation")

        seed_array = np.ones_like(output.value) if seed is None else np.asarray(seed, dtype=np.float64)
        if seed_array.shape != output.value.shape:
            raise ShapeError("backward", seed_array.shape, output.value.shape, detail="seed must match output")

        for node in self.tape:
            node.grad = None
        for leaf in (*self._param_leaves.values(), *self._input_leaves):
            leaf.grad = None

        output.grad = seed_array.copy()
        for node in reversed(self.tape[: output._index + 1]):
            if node.grad is None or node.backward_fn is None:
                continue
            parent_grads = node.backward_fn(node.grad)
            for parent, grad in zip(node.parents, parent_grads):
                if grad is None or not parent.requires_grad:
                    continue
                if parent.grad is None:
                    parent.grad = np.array(grad, dtype=np.float64, copy=True)
                else:
                    parent.grad = parent.grad + grad

        for name, leaf in self._param_leaves.items():
            if leaf.grad is not None:
                self.params.accumulate(name, leaf.grad)
        return self.params
