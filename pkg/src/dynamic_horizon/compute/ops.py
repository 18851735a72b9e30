"""Differentiable primitives over :class:`Tensor`.

Every op computes its value with numpy and hands the graph a closure that maps
the output gradient to one gradient per parent. Binary elementwise ops
broadcast like numpy and sum the gradient back to each operand's shape.
"""

from __future__ import annotations

from typing import Any, Sequence

import numpy as np

from ..constants import LOG_FLOOR
from ..exceptions import ShapeError, UsageError
from .tensor import Graph, Tensor


def _graph_of(*operands: Any) -> Graph:
    for operand in operands:
        if isinstance(operand, Tensor):
            return operand.graph
    raise UsageError("operation needs at least one Tensor operand")


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, extent in enumerate(shape) if extent == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


def _broadcast_shape(op: str, a: Tensor, b: Tensor) -> None:
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(op, a.shape, b.shape) from None


def add(a: Any, b: Any) -> Tensor:
    graph = _graph_of(a, b)
    a, b = graph.lift(a), graph.lift(b)
    _broadcast_shape("add", a, b)
    sa, sb = a.shape, b.shape
    return graph.emit(
        "add",
        a.value + b.value,
        (a, b),
        lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)),
    )


def sub(a: Any, b: Any) -> Tensor:
    graph = _graph_of(a, b)
    a, b = graph.lift(a), graph.lift(b)
    _broadcast_shape("sub", a, b)
    sa, sb = a.shape, b.shape
    return graph.emit(
        "sub",
        a.value - b.value,
        (a, b),
        lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)),
    )


def mul(a: Any, b: Any) -> Tensor:
    graph = _graph_of(a, b)
    a, b = graph.lift(a), graph.lift(b)
    _broadcast_shape("mul", a, b)
    av, bv = a.value, b.value
    return graph.emit(
        "mul",
        av * bv,
        (a, b),
        lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)),
    )


def neg(a: Tensor) -> Tensor:
    return a.graph.emit("neg", -a.value, (a,), lambda g: (-g,))


def scale(a: Tensor, factor: float) -> Tensor:
    factor = float(factor)
    return a.graph.emit("scale", a.value * factor, (a,), lambda g: (g * factor,))


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """``a`` of shape (..., n, k) times a 2-D ``b`` of shape (k, m)."""
    graph = _graph_of(a, b)
    a, b = graph.lift(a), graph.lift(b)
    if b.value.ndim != 2 or a.value.ndim < 1 or a.shape[-1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    av, bv = a.value, b.value

    def backward(g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        grad_a = g @ bv.T
        grad_b = av.reshape(-1, av.shape[-1]).T @ g.reshape(-1, g.shape[-1])
        return grad_a, grad_b

    return graph.emit("matmul", av @ bv, (a, b), backward)


def tanh(a: Tensor) -> Tensor:
    out = np.tanh(a.value)
    return a.graph.emit("tanh", out, (a,), lambda g: (g * (1.0 - out * out),))


def sigmoid(a: Tensor) -> Tensor:
    out = stable_sigmoid(a.value)
    return a.graph.emit("sigmoid", out, (a,), lambda g: (g * out * (1.0 - out),))


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.value)
    return a.graph.emit("exp", out, (a,), lambda g: (g * out,))


def log(a: Tensor, floor: float = LOG_FLOOR) -> Tensor:
    """``log(max(a, floor))``; the clamp passes no gradient below ``floor``."""
    av = a.value
    clamped = np.maximum(av, floor)
    live = av > floor
    return a.graph.emit("log", np.log(clamped), (a,), lambda g: (np.where(live, g / clamped, 0.0),))


def maximum(a: Tensor, floor: float) -> Tensor:
    """Elementwise ``max(a, floor)``; gradient 0 at ties."""
    live = a.value > floor
    return a.graph.emit("maximum", np.maximum(a.value, floor), (a,), lambda g: (np.where(live, g, 0.0),))


def absolute(a: Tensor) -> Tensor:
    sign = np.sign(a.value)
    return a.graph.emit("abs", np.abs(a.value), (a,), lambda g: (g * sign,))


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    if not tensors:
        raise ShapeError("concat", detail="no operands")
    graph = _graph_of(*tensors)
    parts = [graph.lift(t) for t in tensors]
    ndim = parts[0].value.ndim
    axis = axis % ndim
    for part in parts[1:]:
        same_rank = part.value.ndim == ndim
        if not same_rank or any(part.shape[i] != parts[0].shape[i] for i in range(ndim) if i != axis):
            raise ShapeError("concat", *(p.shape for p in parts))
    bounds = np.cumsum([0] + [p.shape[axis] for p in parts])

    def backward(g: np.ndarray) -> list[np.ndarray]:
        return [np.take(g, np.arange(bounds[i], bounds[i + 1]), axis=axis) for i in range(len(parts))]

    return graph.emit("concat", np.concatenate([p.value for p in parts], axis=axis), tuple(parts), backward)


def slice_last(a: Tensor, start: int, stop: int) -> Tensor:
    width = a.shape[-1]
    if not 0 <= start < stop <= width:
        raise ShapeError("slice", a.shape, detail=f"[{start}:{stop}]")
    shape = a.shape

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape, dtype=np.float64)
        full[..., start:stop] = g
        return (full,)

    return a.graph.emit("slice", a.value[..., start:stop], (a,), backward)


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    if not tensors:
        raise ShapeError("stack", detail="no operands")
    graph = _graph_of(*tensors)
    parts = [graph.lift(t) for t in tensors]
    first = parts[0].shape
    if any(p.shape != first for p in parts):
        raise ShapeError("stack", *(p.shape for p in parts))
    out = np.stack([p.value for p in parts], axis=axis)
    axis = axis % out.ndim

    def backward(g: np.ndarray) -> list[np.ndarray]:
        return [np.take(g, i, axis=axis) for i in range(len(parts))]

    return graph.emit("stack", out, tuple(parts), backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    original = a.shape
    try:
        out = a.value.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", original, tuple(shape)) from None
    return a.graph.emit("reshape", out, (a,), lambda g: (g.reshape(original),))


def reduce_sum(a: Tensor, axis: int | None = None) -> Tensor:
    shape = a.shape
    if axis is None:
        return a.graph.emit("sum", np.asarray(a.value.sum()), (a,), lambda g: (np.broadcast_to(g, shape).copy(),))
    axis = axis % a.value.ndim

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.broadcast_to(np.expand_dims(g, axis), shape).copy(),)

    return a.graph.emit("sum", a.value.sum(axis=axis), (a,), backward)


def cumsum_last(a: Tensor) -> Tensor:
    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (np.flip(np.cumsum(np.flip(g, axis=-1), axis=-1), axis=-1),)

    return a.graph.emit("cumsum", np.cumsum(a.value, axis=-1), (a,), backward)


def softmax_last(a: Tensor) -> Tensor:
    shifted = a.value - a.value.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=-1, keepdims=True)

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return a.graph.emit("softmax", out, (a,), backward)


def gather_last(a: Tensor, indices: np.ndarray) -> Tensor:
    """Pick ``a[..., indices[...]]``; ``indices`` has ``a``'s shape minus the last axis."""
    idx = np.asarray(indices, dtype=np.int64)
    if idx.shape != a.shape[:-1]:
        raise ShapeError("gather", a.shape, idx.shape)
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[-1]):
        raise ShapeError("gather", a.shape, idx.shape, detail="index out of range")
    shape = a.shape
    out = np.take_along_axis(a.value, idx[..., None], axis=-1)[..., 0]

    def backward(g: np.ndarray) -> tuple[np.ndarray]:
        full = np.zeros(shape, dtype=np.float64)
        np.put_along_axis(full, idx[..., None], g[..., None], axis=-1)
        return (full,)

    return a.graph.emit("gather", out, (a,), backward)


def max_last(a: Tensor) -> Tensor:
    """Maximum over the last axis; the gradient goes to the first argmax."""
    return gather_last(a, np.argmax(a.value, axis=-1))


def one_hot(labels: np.ndarray, depth: int) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size and (labels.min() < 0 or labels.max() >= depth):
        raise ShapeError("one_hot", labels.shape, detail=f"labels outside 0..{depth - 1}")
    return np.eye(depth, dtype=np.float64)[labels]


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out
