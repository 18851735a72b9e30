"""CSV/JSON report files written under the run output directory."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from ..exceptions import DataFileMissing
from ..schemas import BaselineRow, CurveAnchor, RunReport, SweepPoint
from ..utils.filesystem import ensure_parent

SWEEP_COLUMNS = ["tau", "lambda", "mask", "confidence", "f1", "avg_len", "above_curve", "status", "message"]
SENSITIVITY_COLUMNS = ["tau", "avg_len", "confidence", "mask"]
WINDOW_COLUMNS = ["window", "f1_dynamic", "avg_len", "coverage", "f1_static_1", "f1_static_T", "measured"]
CURVE_COLUMNS = ["length", "f1"]
BASELINE_COLUMNS = ["architecture", "horizon", "f1", "status"]


def write_table(rows: Iterable[dict[str, Any]], columns: list[str], path: str | Path) -> Path:
    """Write rows with a fixed column order; byte-identical for identical rows."""
    p = Path(path)
    ensure_parent(p)
    frame = pd.DataFrame(list(rows), columns=columns)
    frame.to_csv(p, index=False, float_format="%.10g", lineterminator="\n")
    return p


def read_table(path: str | Path) -> pd.DataFrame:
    p = Path(path)
    if not p.exists():
        raise DataFileMissing(f"report not found: {p}")
    return pd.read_csv(p, keep_default_na=True)


def sweep_rows(points: list[SweepPoint]) -> list[dict[str, Any]]:
    return [
        {
            "tau": p.tau,
            "lambda": p.lam,
            "mask": p.mask,
            "confidence": p.confidence,
            "f1": p.f1,
            "avg_len": p.avg_len,
            "above_curve": p.above_curve,
            "status": p.status,
            "message": p.message,
        }
        for p in points
    ]


def points_from_frame(frame: pd.DataFrame) -> list[SweepPoint]:
    points = []
    for row in frame.to_dict(orient="records"):
        clean = {key: (None if pd.isna(value) else value) for key, value in row.items()}
        points.append(
            SweepPoint(
                tau=float(clean["tau"]),
                lam=float(clean["lambda"]),
                mask=str(clean["mask"]),
                confidence=str(clean["confidence"]),
                f1=clean["f1"],
                avg_len=clean["avg_len"],
                above_curve=None if clean["above_curve"] is None else bool(clean["above_curve"]),
                status=clean.get("status") or "ok",
                message=clean.get("message") or "",
            )
        )
    return points


def anchors_from_frame(frame: pd.DataFrame) -> list[CurveAnchor]:
    return [CurveAnchor(length=int(row["length"]), f1=float(row["f1"])) for row in frame.to_dict(orient="records")]


def window_rows(
    report: RunReport,
    static_one: RunReport | None = None,
    static_full: RunReport | None = None,
) -> list[dict[str, Any]]:
    """One row per window; static F1 columns come from companion static runs."""

    def f1_at(run: RunReport | None, window: int) -> float | None:
        if run is None:
            return None
        return next((w.f1 for w in run.windows if w.window == window), None)

    rows = []
    for w in report.windows:
        row = {
            "window": w.window,
            "f1_dynamic": w.f1 if report.mode == "dynamic" else None,
            "avg_len": w.avg_len,
            "coverage": w.coverage,
            "f1_static_1": f1_at(static_one, w.window),
            "f1_static_T": f1_at(static_full, w.window),
            "measured": w.measured,
        }
        if report.mode == "static":
            row["f1_static_1" if report.horizon == 1 else "f1_static_T"] = w.f1
        rows.append(row)
    return rows


def baseline_rows(rows: list[BaselineRow]) -> list[dict[str, Any]]:
    return [{"architecture": r.architecture, "horizon": r.horizon, "f1": r.f1, "status": r.status} for r in rows]
