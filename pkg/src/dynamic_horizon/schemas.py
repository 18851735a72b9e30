"""Pydantic schemas for run reports and telemetry payloads."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, Field


class WindowReport(BaseModel):
    window: int
    measured: bool
    train_start: int
    test_start: int
    test_end: int
    epochs: int
    best_validation_f1: float | None = None
    f1: float | None = None
    avg_len: float
    coverage: float
    per_series_avg_len: list[float] = Field(default_factory=list)
    start_digest: str
    end_digest: str


class RunReport(BaseModel):
    run_id: str
    model_kind: str
    mode: Literal["static", "dynamic"]
    horizon: int
    beta: float
    windows: list[WindowReport] = Field(default_factory=list)
    mean_f1: float | None = None
    mean_avg_len: float = 0.0
    mean_coverage: float = 0.0
    per_series_avg_len: list[float] = Field(default_factory=list)

    def measured(self) -> list[WindowReport]:
        return [window for window in self.windows if window.measured]


class SweepPoint(BaseModel):
    tau: float
    lam: float
    mask: str
    confidence: str
    f1: float | None = None
    avg_len: float | None = None
    above_curve: bool | None = None
    status: Literal["ok", "error"] = "ok"
    message: str = ""
    per_series_avg_len: list[float] = Field(default_factory=list)


class CurveAnchor(BaseModel):
    length: int
    f1: float


class SensitivityFit(BaseModel):
    slope: float
    intercept: float
    correlation: float | None = None
    points: int


class SummaryRow(BaseModel):
    architecture: str
    confidence: str
    mask: str
    f1_gap_pct: float
    tau: float
    lam: float
    prediction_length: float
    f1: float

    def render(self) -> str:
        return (
            f"{self.architecture} {self.f1_gap_pct:.2f} "
            f"({self.tau:.2f},{self.lam:.1f}) {self.prediction_length:.2f}"
        )


class BaselineRow(BaseModel):
    architecture: str
    kind: str
    horizon: int
    f1: float | None = None
    status: Literal["ok", "error"] = "ok"
    message: str = ""


class GradCheckRow(BaseModel):
    name: str
    max_relative_error: float | None = None
    worst_parameter: str | None = None
    passed: bool
    skipped: bool = False
    note: str = ""


class RunEvent(BaseModel):
    event_type: str
    run_id: str
    stage: str
    message: str
    severity: Literal["info", "warn", "error"] = "info"
    created_at: str
    payload: dict[str, Any] = Field(default_factory=dict)
