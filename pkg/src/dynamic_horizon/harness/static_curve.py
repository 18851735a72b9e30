"""Static-model F1 curve over prediction length."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import RunConfig
from ..exceptions import HarnessError
from ..runtime.event_bus import EventBus, publish
from ..schemas import CurveAnchor
from .walk_forward import MarketData, run_walk_forward


@dataclass
class StaticCurve:
    """Piecewise-linear F1 over length; outside the anchors it clamps to the end values."""

    anchors: list[CurveAnchor]

    def __post_init__(self) -> None:
        self.anchors = sorted(self.anchors, key=lambda a: a.length)

    @property
    def lengths(self) -> np.ndarray:
        return np.array([a.length for a in self.anchors], dtype=np.float64)

    @property
    def scores(self) -> np.ndarray:
        return np.array([a.f1 for a in self.anchors], dtype=np.float64)

    def value(self, length: float) -> float:
        return float(np.interp(length, self.lengths, self.scores))

    def rows(self) -> list[dict[str, float]]:
        return [{"length": a.length, "f1": a.f1} for a in self.anchors]


def build_static_curve(
    market: MarketData,
    config: RunConfig,
    lengths: list[int] | None = None,
    *,
    bus: EventBus | None = None,
) -> StaticCurve:
    """Train one static seq2seq per anchor length under the walk-forward protocol.

    Lengths whose measured windows yield no F1 are left out of the curve.
    """
    lengths = lengths or config.sweep.curve_lengths
    model = config.model.model_copy(update={"kind": "seq2seq", "max_horizon": max(max(lengths), config.model.max_horizon)})
    anchors = []
    for length in lengths:
        result = run_walk_forward(
            market,
            config,
            mode="static",
            horizon=length,
            model_config=model,
            bus=bus,
            run_id=f"static-{length}",
        )
        if result.report.mean_f1 is None:
            publish(
                bus,
                event_type="curve.anchor_skipped",
                stage="static_curve",
                message=f"length {length} has no measured F1",
                severity="warn",
                payload={"length": length},
            )
            continue
        anchor = CurveAnchor(length=length, f1=result.report.mean_f1)
        anchors.append(anchor)
        publish(
            bus,
            event_type="curve.anchor_completed",
            stage="static_curve",
            message=f"length {length} f1={anchor.f1:.4f}",
            payload=anchor.model_dump(),
        )
    if not anchors:
        raise HarnessError(f"no static anchor produced an F1 for lengths {lengths}")
    return StaticCurve(anchors)
