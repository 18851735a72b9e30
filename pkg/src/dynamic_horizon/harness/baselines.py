"""Baseline table: single-prediction FFN/LSTM/seq2seq and the ten-step seq2seq."""

from __future__ import annotations

from ..config import RunConfig
from ..exceptions import DynamicHorizonError
from ..runtime.event_bus import EventBus, publish
from ..schemas import BaselineRow
from .walk_forward import MarketData, run_walk_forward


def baseline_specs(config: RunConfig) -> list[tuple[str, str, int]]:
    """(architecture label, model kind, horizon)."""
    horizon = config.loss.horizon
    return [
        ("FFN (One Pred)", "ffn", 1),
        ("LSTM (One Pred)", "lstm", 1),
        ("LSTM Seq2Seq (One Pred)", "seq2seq", 1),
        (f"LSTM Seq2Seq ({'Ten' if horizon == 10 else horizon} Pred)", "seq2seq", horizon),
    ]


def run_baselines(market: MarketData, config: RunConfig, *, bus: EventBus | None = None) -> list[BaselineRow]:
    rows = []
    for architecture, kind, horizon in baseline_specs(config):
        # Architecture defaults (input length, layers) come from the kind.
        model = config.model.model_copy(update={"kind": kind, "input_length": None, "layers": None})
        try:
            result = run_walk_forward(
                market,
                config,
                mode="static",
                horizon=horizon,
                model_config=model,
                bus=bus,
                run_id=f"baseline-{kind}-{horizon}",
            )
            row = BaselineRow(architecture=architecture, kind=kind, horizon=horizon, f1=result.report.mean_f1)
        except DynamicHorizonError as exc:
            row = BaselineRow(
                architecture=architecture, kind=kind, horizon=horizon, status="error", message=f"{type(exc).__name__}: {exc}"
            )
        rows.append(row)
        publish(
            bus,
            event_type="baseline.completed",
            stage="baselines",
            message=f"{architecture} f1={row.f1}",
            severity="info" if row.status == "ok" else "warn",
            payload=row.model_dump(),
        )
    return rows
