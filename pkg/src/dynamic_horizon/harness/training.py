"""Mini-batch training with validation early stopping.

Epochs are ranked by validation F1; an epoch that emits nothing ranks below
every emitting one and is compared to its peers by validation loss.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..compute.optim import OptimizerState, optimizer_step
from ..compute.params import ParameterSet
from ..compute.tensor import Graph, Tensor
from ..config import DynamicLossConfig, TrainMode
from ..data.windows import WindowSet
from ..loss.dynamic import dynamic_loss, static_loss, truncated_backward
from ..loss.rollout import dynamic_rollout, static_rollout
from ..models.base import SequenceModel
from ..runtime.event_bus import EventBus, publish
from .metrics import EvaluationSummary, summarize


@dataclass
class TrainingPlan:
    """What one walk-forward run optimizes: static KL at ``horizon`` or the dynamic loss."""

    mode: TrainMode
    horizon: int
    loss: DynamicLossConfig

    @classmethod
    def build(cls, mode: TrainMode, horizon: int, loss: DynamicLossConfig) -> "TrainingPlan":
        if mode == "dynamic" and loss.horizon != horizon:
            loss = loss.model_copy(update={"horizon": horizon})
        return cls(mode=mode, horizon=horizon, loss=loss)


@dataclass
class FitResult:
    epochs: int
    best_validation_f1: float | None
    stopped_early: bool


class Trainer:
    def __init__(
        self,
        model: SequenceModel,
        params: ParameterSet,
        plan: TrainingPlan,
        *,
        batch_size: int = 64,
        eval_batch_size: int = 512,
        bus: EventBus | None = None,
    ) -> None:
        self.model = model
        self.params = params
        self.plan = plan
        self.batch_size = batch_size
        self.eval_batch_size = eval_batch_size
        self.bus = bus

    def batch_loss(self, graph: Graph, batch: WindowSet) -> Tensor:
        steps = self.model.distributions(
            graph, batch.inputs, batch.first_labels, self.plan.horizon, targets=batch.targets
        )
        if self.plan.mode == "static":
            return static_loss(steps, batch.targets, self.plan.horizon)
        loss, _ = dynamic_loss(steps, batch.targets, self.plan.loss, batch.first_labels)
        return loss

    def train_epoch(self, windows: WindowSet, optimizer: OptimizerState, rng: np.random.Generator) -> float:
        total, count = 0.0, 0
        for batch in windows.batches(self.batch_size, rng):
            loss = self.batch_loss(Graph(self.params), batch)
            truncated_backward(loss)
            optimizer_step(optimizer, self.params)
            total += loss.item() * len(batch)
            count += len(batch)
        return total / max(count, 1)

    def predict(self, windows: WindowSet) -> tuple[np.ndarray, np.ndarray]:
        """Emitted labels (samples, series, steps) and lengths (samples, series)."""
        labels, lengths = [], []
        for batch in windows.batches(self.eval_batch_size):
            if self.plan.mode == "static":
                rollout = static_rollout(self.model, self.params, batch.inputs, batch.first_labels, self.plan.horizon)
            else:
                rollout = dynamic_rollout(self.model, self.params, batch.inputs, batch.first_labels, self.plan.loss)
            labels.append(rollout.labels)
            lengths.append(rollout.lengths)
        return np.concatenate(labels), np.concatenate(lengths)

    def evaluate(self, windows: WindowSet) -> EvaluationSummary:
        labels, lengths = self.predict(windows)
        return summarize(labels, lengths, windows.targets)

    def mean_loss(self, windows: WindowSet) -> float:
        """Training objective over ``windows`` without recording a tape."""
        total, count = 0.0, 0
        for batch in windows.batches(self.eval_batch_size):
            total += self.batch_loss(Graph(self.params, record=False), batch).item() * len(batch)
            count += len(batch)
        return total / max(count, 1)

    def validation_score(self, windows: WindowSet) -> tuple[tuple[int, float], EvaluationSummary, float]:
        summary = self.evaluate(windows)
        loss = self.mean_loss(windows)
        score = (1, summary.f1) if summary.f1 is not None else (0, -loss)
        return score, summary, loss

    def fit(
        self,
        train: WindowSet,
        validation: WindowSet,
        optimizer: OptimizerState,
        *,
        max_epochs: int,
        patience: int,
        rng: np.random.Generator,
        window: int = 0,
    ) -> FitResult:
        """Train until validation stops improving for ``patience`` epochs; keep the best weights.

        The incoming weights are scored first, so an epoch only replaces them
        when it validates better.
        """
        best_score, start, _ = self.validation_score(validation)
        best_f1: float | None = start.f1
        best_params = self.params.clone()
        since_best = 0
        epoch = 0
        for epoch in range(1, max_epochs + 1):
            train_loss = self.train_epoch(train, optimizer, rng)
            score, summary, validation_loss = self.validation_score(validation)
            improved = score > best_score
            if improved:
                best_score, best_f1, since_best = score, summary.f1, 0
                best_params = self.params.clone()
            else:
                since_best += 1
            publish(
                self.bus,
                event_type="window.epoch",
                stage="training",
                message=f"window {window} epoch {epoch}",
                payload={
                    "window": window,
                    "epoch": epoch,
                    "mode": self.plan.mode,
                    "train_loss": train_loss,
                    "validation_loss": validation_loss,
                    "validation_f1": summary.f1,
                    "validation_avg_len": summary.avg_len,
                    "improved": improved,
                },
            )
            if since_best >= patience:
                publish(
                    self.bus,
                    event_type="window.early_stopped",
                    stage="training",
                    message=f"window {window} stopped after {epoch} epochs",
                    payload={"window": window, "epoch": epoch, "best_validation_f1": best_f1},
                )
                self.params.load_from(best_params)
                return FitResult(epochs=epoch, best_validation_f1=best_f1, stopped_early=True)
        self.params.load_from(best_params)
        return FitResult(epochs=epoch, best_validation_f1=best_f1, stopped_early=False)
