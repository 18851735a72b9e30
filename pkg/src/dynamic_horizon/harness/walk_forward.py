"""Walk-forward protocol: warm-started retraining over rolling train/test spans."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from ..compute.checkpoint import save_checkpoint
from ..compute.optim import OptimizerState, build_optimizer
from ..compute.params import ParameterSet
from ..config import ModelConfig, RunConfig, TrainMode
from ..data.labeling import calibrate_beta, compute_returns, label_series, standardized_returns
from ..data.windows import WindowSet, make_windows, normalize
from ..exceptions import DataError, DataExhausted
from ..models.factory import build_model
from ..runtime.event_bus import EventBus, publish
from ..schemas import RunReport, WindowReport
from ..utils.fingerprints import derive_seed
from .training import FitResult, Trainer, TrainingPlan


@dataclass
class MarketData:
    """Returns and labels of the whole dataset under one fixed β."""

    returns: np.ndarray
    labels: np.ndarray
    beta: float
    ticks_per_day: int

    @property
    def series_count(self) -> int:
        return int(self.returns.shape[1])

    def __len__(self) -> int:
        return int(self.returns.shape[0])


def prepare_market(prices: pd.DataFrame, config: RunConfig, bus: EventBus | None = None) -> MarketData:
    """Label every tick; β is calibrated on the first training span unless configured."""
    returns = compute_returns(prices)
    tpd = config.synthetic.ticks_per_day
    beta = config.labeling.beta
    calibrated = beta is None
    if beta is None:
        span = returns[: config.walk_forward.train_span]
        beta = calibrate_beta(standardized_returns(span, tpd), config.labeling.target_middle_fraction)
    labels = label_series(returns, tpd, beta)
    publish(
        bus,
        event_type="labels.calibrated",
        stage="labeling",
        message=f"beta={beta:.4f}",
        payload={"beta": beta, "calibrated": calibrated, "ticks": int(returns.shape[0])},
    )
    return MarketData(returns=returns, labels=labels, beta=float(beta), ticks_per_day=tpd)


@dataclass
class WindowSpans:
    window: int
    train_start: int
    test_start: int
    test_end: int


def window_spans(config: RunConfig, available: int) -> list[WindowSpans]:
    wf = config.walk_forward
    required = wf.required_ticks()
    if available < required:
        raise DataExhausted(f"walk-forward needs {required} ticks, dataset has {available}")
    spans = []
    for w in range(wf.window_count):
        start = w * wf.stride
        spans.append(WindowSpans(w, start, start + wf.train_span, start + wf.train_span + wf.test_span))
    return spans


def window_data(
    market: MarketData,
    span: WindowSpans,
    input_length: int,
    horizon: int,
) -> tuple[WindowSet, WindowSet]:
    """Train and test windows; features are z-scored with train-span statistics only.

    Test windows take their encoder context from the ticks just before the test
    span, so every target falls inside it.
    """
    context = span.test_start - input_length
    if context < span.train_start:
        raise DataError(f"train span of {span.test_start - span.train_start} ticks is shorter than the encoder input {input_length}")
    train_x, eval_x, _ = normalize(
        market.returns[span.train_start : span.test_start],
        market.returns[context : span.test_end],
    )
    train = make_windows(
        train_x, market.labels[span.train_start : span.test_start], input_length, horizon, offset=span.train_start
    )
    test = make_windows(eval_x, market.labels[context : span.test_end], input_length, horizon, offset=context)
    return train.labeled(), test.labeled()


@dataclass
class WalkForwardResult:
    report: RunReport
    params: ParameterSet


def _mean(values: list[float]) -> float | None:
    return float(np.mean(values)) if values else None


def pretrain(
    trainer: Trainer,
    market: MarketData,
    span: WindowSpans,
    config: RunConfig,
    optimizer: OptimizerState,
    *,
    rng: np.random.Generator,
    bus: EventBus | None = None,
    run_id: str = "run",
) -> FitResult:
    """Fit the static teacher-forced KL on the first training span, in place.

    A freshly initialized model is near-uniform, so every confidence sits
    below the threshold and the dynamic loss starts on its empty sum.
    """
    plan = trainer.plan
    train, _ = window_data(market, span, trainer.model.input_length, plan.horizon)
    train_part, validation = train.split_tail(config.training.validation_fraction)
    trainer.plan = TrainingPlan.build("static", plan.horizon, plan.loss)
    try:
        epochs = config.training.pretrain_epochs
        fit = trainer.fit(
            train_part, validation, optimizer, max_epochs=epochs, patience=epochs, rng=rng, window=span.window
        )
    finally:
        trainer.plan = plan
    publish(
        bus,
        event_type="walk_forward.pretrained",
        stage="walk_forward",
        message=f"static pretraining over {fit.epochs} epochs",
        run_id=run_id,
        payload={"epochs": fit.epochs, "validation_f1": fit.best_validation_f1, "digest": trainer.params.digest()},
    )
    return fit


def run_walk_forward(
    market: MarketData,
    config: RunConfig,
    *,
    mode: TrainMode | None = None,
    horizon: int | None = None,
    model_config: ModelConfig | None = None,
    seed: int | None = None,
    bus: EventBus | None = None,
    checkpoint_dir: Path | None = None,
    run_id: str = "run",
) -> WalkForwardResult:
    mode = mode or config.training.mode
    model_config = model_config or config.model
    if model_config.kind != "seq2seq":
        horizon = 1
    horizon = horizon or config.loss.horizon
    if model_config.kind == "seq2seq" and model_config.max_horizon < horizon:
        model_config = model_config.model_copy(update={"max_horizon": horizon})
    seed = config.walk_forward_seed() if seed is None else seed

    model = build_model(model_config, market.series_count)
    params = model.init_params(np.random.default_rng(derive_seed(seed, "init")))
    plan = TrainingPlan.build(mode, horizon, config.loss)
    trainer = Trainer(
        model,
        params,
        plan,
        batch_size=config.training.batch_size,
        eval_batch_size=config.training.eval_batch_size,
        bus=bus,
    )
    optimizer_kind, lr = config.training.optimizer_for(model.config.kind)
    wf = config.walk_forward
    spans = window_spans(config, len(market))

    if mode == "dynamic" and config.training.pretrain_epochs > 0:
        pretrain(
            trainer,
            market,
            spans[0],
            config,
            build_optimizer(optimizer_kind, lr),
            rng=np.random.default_rng(derive_seed(seed, "pretrain")),
            bus=bus,
            run_id=run_id,
        )

    windows: list[WindowReport] = []
    for span in spans:
        start_digest = params.digest()
        publish(
            bus,
            event_type="window.started",
            stage="walk_forward",
            message=f"window {span.window}",
            run_id=run_id,
            payload={"window": span.window, "train_start": span.train_start, "start_digest": start_digest},
        )
        train, test = window_data(market, span, model.input_length, horizon)
        train_part, validation = train.split_tail(config.training.validation_fraction)
        fit = trainer.fit(
            train_part,
            validation,
            build_optimizer(optimizer_kind, lr),
            max_epochs=wf.max_epochs,
            patience=wf.patience,
            rng=np.random.default_rng(derive_seed(seed, "window", span.window)),
            window=span.window,
        )
        summary = trainer.evaluate(test)
        end_digest = params.digest()
        if checkpoint_dir is not None:
            save_checkpoint(params, Path(checkpoint_dir) / f"window_{span.window}.ckpt")
        report = WindowReport(
            window=span.window,
            measured=span.window >= wf.warm_start_windows,
            train_start=span.train_start,
            test_start=span.test_start,
            test_end=span.test_end,
            epochs=fit.epochs,
            best_validation_f1=fit.best_validation_f1,
            f1=summary.f1,
            avg_len=summary.avg_len,
            coverage=summary.coverage,
            per_series_avg_len=summary.per_series_avg_len,
            start_digest=start_digest,
            end_digest=end_digest,
        )
        windows.append(report)
        publish(
            bus,
            event_type="window.completed",
            stage="walk_forward",
            message=f"window {span.window} f1={summary.f1}",
            run_id=run_id,
            payload=report.model_dump(mode="json"),
        )

    if checkpoint_dir is not None:
        save_checkpoint(params, Path(checkpoint_dir) / "final.ckpt")
    measured = [w for w in windows if w.measured]
    per_series = np.mean([w.per_series_avg_len for w in measured], axis=0) if measured else []
    report = RunReport(
        run_id=run_id,
        model_kind=model.config.kind,
        mode=mode,
        horizon=horizon,
        beta=market.beta,
        windows=windows,
        mean_f1=_mean([w.f1 for w in measured if w.f1 is not None]),
        mean_avg_len=_mean([w.avg_len for w in measured]) or 0.0,
        mean_coverage=_mean([w.coverage for w in measured]) or 0.0,
        per_series_avg_len=[float(v) for v in per_series],
    )
    return WalkForwardResult(report=report, params=params)
