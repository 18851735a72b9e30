"""(τ, λ) grid sweep over independent dynamic walk-forward runs."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from typing import Any, Iterator

from ..config import RunConfig, apply_overrides, validate_run_config
from ..exceptions import DynamicHorizonError
from ..runtime.event_bus import EventBus, publish
from ..schemas import SweepPoint
from ..utils.fingerprints import derive_seed
from .static_curve import StaticCurve
from .walk_forward import MarketData, run_walk_forward


@dataclass(frozen=True)
class GridPoint:
    confidence: str
    mask: str
    tau: float
    lam: float


@dataclass
class PointTask:
    point: GridPoint
    payload: dict[str, Any]
    seed: int
    market: MarketData


def sweep_grid(config: RunConfig) -> list[GridPoint]:
    """Grid order: confidence, mask, τ, λ."""
    grid = config.sweep
    return [
        GridPoint(confidence, mask, float(tau), float(lam))
        for confidence, mask, tau, lam in product(grid.confidences, grid.masks, grid.taus, grid.lambdas)
    ]


def point_seed(config: RunConfig, point: GridPoint) -> int:
    """Depends on (master seed, τ, λ) only, so growing the grid leaves old points unchanged."""
    return derive_seed(config.seed, point.tau, point.lam)


def evaluate_point(task: PointTask) -> SweepPoint:
    """One dynamic walk-forward run; failures become ``status="error"`` rows."""
    point = task.point
    base = SweepPoint(tau=point.tau, lam=point.lam, mask=point.mask, confidence=point.confidence)
    try:
        config = apply_overrides(
            validate_run_config(task.payload),
            {
                "training.mode": "dynamic",
                "loss.tau": point.tau,
                "loss.lambda": point.lam,
                "loss.confidence": point.confidence,
                "loss.mask": point.mask,
            },
        )
        result = run_walk_forward(
            task.market,
            config,
            mode="dynamic",
            seed=task.seed,
            run_id=f"sweep-{point.confidence}-{point.mask}-{point.tau}-{point.lam}",
        )
    except DynamicHorizonError as exc:
        return base.model_copy(update={"status": "error", "message": f"{type(exc).__name__}: {exc}"})
    report = result.report
    return base.model_copy(
        update={
            "f1": report.mean_f1,
            "avg_len": report.mean_avg_len,
            "per_series_avg_len": report.per_series_avg_len,
        }
    )


def _tasks(market: MarketData, config: RunConfig, grid: list[GridPoint]) -> Iterator[PointTask]:
    payload = config.to_payload()
    for point in grid:
        yield PointTask(point=point, payload=payload, seed=point_seed(config, point), market=market)


def run_sweep(
    market: MarketData,
    config: RunConfig,
    curve: StaticCurve,
    *,
    workers: int | None = None,
    bus: EventBus | None = None,
) -> list[SweepPoint]:
    """Evaluate every grid point; results come back in grid order for any worker count."""
    workers = workers or config.sweep.workers
    grid = sweep_grid(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            raw = list(pool.map(evaluate_point, _tasks(market, config, grid)))
    else:
        raw = [evaluate_point(task) for task in _tasks(market, config, grid)]

    points = []
    for point in raw:
        if point.status == "ok" and point.f1 is not None and point.avg_len is not None:
            point = point.model_copy(update={"above_curve": point.f1 > curve.value(point.avg_len)})
        points.append(point)
        failed = point.status == "error"
        publish(
            bus,
            event_type="sweep.point_failed" if failed else "sweep.point_completed",
            stage="sweep",
            message=point.message if failed else f"tau={point.tau} lambda={point.lam} f1={point.f1}",
            severity="warn" if failed else "info",
            payload=point.model_dump(mode="json"),
        )
    return points
