"""Sliding encoder/decoder windows and train-only normalization."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from ..exceptions import DataError
from .labeling import UNLABELED


@dataclass
class LabeledWindow:
    inputs: np.ndarray
    targets: np.ndarray
    first_labels: np.ndarray
    start: int


@dataclass
class WindowSet:
    """Stacked windows: inputs (N, T̄, Q), targets (N, T, Q), first_labels (N, Q)."""

    inputs: np.ndarray
    targets: np.ndarray
    first_labels: np.ndarray
    starts: np.ndarray

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def __getitem__(self, index: int) -> LabeledWindow:
        return LabeledWindow(
            inputs=self.inputs[index],
            targets=self.targets[index],
            first_labels=self.first_labels[index],
            start=int(self.starts[index]),
        )

    def take(self, index: np.ndarray | slice) -> "WindowSet":
        return WindowSet(self.inputs[index], self.targets[index], self.first_labels[index], self.starts[index])

    def labeled(self) -> "WindowSet":
        """Drop windows touching unlabeled ticks."""
        keep = (self.first_labels != UNLABELED).all(axis=1) & (self.targets != UNLABELED).all(axis=(1, 2))
        return self.take(np.flatnonzero(keep))

    def split_tail(self, fraction: float) -> tuple["WindowSet", "WindowSet"]:
        """Chronological split; the tail holds ``fraction`` of the windows, at least one."""
        if len(self) < 2:
            raise DataError("need at least two windows to hold out a validation tail")
        tail = min(len(self) - 1, max(1, int(round(fraction * len(self)))))
        cut = len(self) - tail
        return self.take(slice(0, cut)), self.take(slice(cut, None))

    def batches(self, batch_size: int, rng: np.random.Generator | None = None) -> Iterator["WindowSet"]:
        order = np.arange(len(self)) if rng is None else rng.permutation(len(self))
        for begin in range(0, len(self), batch_size):
            yield self.take(order[begin : begin + batch_size])


def make_windows(
    features: np.ndarray,
    labels: np.ndarray,
    input_length: int,
    horizon: int,
    *,
    offset: int = 0,
) -> WindowSet:
    """Stride-1 windows; window i reads ticks [i, i+T̄) and targets [i+T̄, i+T̄+T).

    The first decoder label is the label of the last encoder tick.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.shape != y.shape or x.ndim != 2:
        raise DataError(f"features {x.shape} and labels {y.shape} must share a (ticks, series) shape")
    count = x.shape[0] - input_length - horizon + 1
    if count < 1:
        raise DataError(f"{x.shape[0]} ticks cannot hold one window of {input_length}+{horizon}")
    starts = np.arange(count)
    encoder = starts[:, None] + np.arange(input_length)[None, :]
    decoder = starts[:, None] + input_length + np.arange(horizon)[None, :]
    return WindowSet(
        inputs=x[encoder],
        targets=y[decoder],
        first_labels=y[starts + input_length - 1],
        starts=starts + offset,
    )


@dataclass
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=np.float64) - self.mean) / self.std


def normalize(train: np.ndarray, evaluation: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None, NormalizationStats]:
    """Per-series z-score with statistics of ``train`` only."""
    x = np.asarray(train, dtype=np.float64)
    if x.size == 0:
        raise DataError("empty training span")
    stats = NormalizationStats(mean=x.mean(axis=0), std=x.std(axis=0))
    if np.any(stats.std <= 0):
        raise DataError("constant training series cannot be normalized")
    return stats.apply(x), (None if evaluation is None else stats.apply(evaluation)), stats
