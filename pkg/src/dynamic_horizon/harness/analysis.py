"""τ-sensitivity regression, F1 gap and the per-confidence summary table."""

from __future__ import annotations

from typing import Any

import numpy as np

from ..constants import CONFIDENCE_ABBREVIATIONS
from ..exceptions import DegenerateFitError, HarnessError
from ..schemas import SensitivityFit, SummaryRow, SweepPoint
from .static_curve import StaticCurve


def sensitivity_fit(taus: list[float], lengths: list[float]) -> SensitivityFit:
    """OLS of length on τ plus Pearson r; r is ``None`` for constant lengths."""
    x = np.asarray(taus, dtype=np.float64)
    y = np.asarray(lengths, dtype=np.float64)
    if x.shape != y.shape:
        raise HarnessError(f"{x.size} taus against {y.size} lengths")
    if x.size < 3:
        raise DegenerateFitError(f"need at least 3 points, got {x.size}")
    if np.ptp(x) == 0.0:
        raise DegenerateFitError("all taus are equal")
    dx = x - x.mean()
    sxx = float(np.dot(dx, dx))
    dy = y - y.mean()
    slope = float(np.dot(dx, dy)) / sxx
    syy = float(np.dot(dy, dy))
    correlation = float(np.dot(dx, dy) / np.sqrt(sxx * syy)) if syy > 0.0 else None
    return SensitivityFit(
        slope=slope,
        intercept=float(y.mean() - slope * x.mean()),
        correlation=correlation,
        points=int(x.size),
    )


def f1_gap(f1: float, avg_len: float, curve: StaticCurve) -> float:
    """Percent improvement of ``f1`` over the static curve at the same length."""
    reference = curve.value(avg_len)
    if reference == 0.0:
        raise HarnessError(f"static curve is 0 at length {avg_len}")
    return 100.0 * (f1 - reference) / reference


def sensitivity_points(points: list[SweepPoint], lam: float) -> dict[tuple[str, str], list[SweepPoint]]:
    """Successful points at ``lam``, grouped by (confidence, mask), sorted by τ."""
    groups: dict[tuple[str, str], list[SweepPoint]] = {}
    for point in points:
        if point.status == "ok" and point.avg_len is not None and np.isclose(point.lam, lam):
            groups.setdefault((point.confidence, point.mask), []).append(point)
    return {key: sorted(group, key=lambda p: p.tau) for key, group in groups.items()}


def summary_rows(points: list[SweepPoint], curve: StaticCurve, architecture: str = "Dynamic") -> list[SummaryRow]:
    """Best point by F1 gap for each confidence kind and mask."""
    best: dict[tuple[str, str], SummaryRow] = {}
    for point in points:
        if point.status != "ok" or point.f1 is None or point.avg_len is None:
            continue
        try:
            gap = f1_gap(point.f1, point.avg_len, curve)
        except HarnessError:
            continue
        row = SummaryRow(
            architecture=f"{architecture} {CONFIDENCE_ABBREVIATIONS.get(point.confidence, point.confidence)}",
            confidence=point.confidence,
            mask=point.mask,
            f1_gap_pct=gap,
            tau=point.tau,
            lam=point.lam,
            prediction_length=point.avg_len,
            f1=point.f1,
        )
        key = (point.confidence, point.mask)
        if key not in best or gap > best[key].f1_gap_pct:
            best[key] = row
    return list(best.values())


def build_summary(
    points: list[SweepPoint],
    curve: StaticCurve,
    sensitivity_lambda: float,
) -> dict[str, Any]:
    rows = summary_rows(points, curve)
    best = max(rows, key=lambda row: row.f1_gap_pct, default=None)
    fits: list[dict[str, Any]] = []
    for (confidence, mask), group in sensitivity_points(points, sensitivity_lambda).items():
        entry: dict[str, Any] = {"confidence": confidence, "mask": mask, "lambda": sensitivity_lambda}
        try:
            entry.update(sensitivity_fit([p.tau for p in group], [p.avg_len or 0.0 for p in group]).model_dump())
        except DegenerateFitError as exc:
            entry["error"] = str(exc)
        fits.append(entry)
    return {
        "curve": curve.rows(),
        "rows": [row.model_dump() | {"rendered": row.render()} for row in rows],
        "best": best.model_dump() | {"rendered": best.render()} if best is not None else None,
        "sensitivity": fits,
        "points": len(points),
        "failed_points": sum(1 for p in points if p.status == "error"),
        "above_curve_points": sum(1 for p in points if p.above_curve),
    }
