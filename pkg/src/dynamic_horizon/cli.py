"""Command-line interface for the dynamic-horizon forecasting engine."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Any

try:
    from dotenv import load_dotenv
except Exception:  # pragma: no cover - optional runtime dependency
    load_dotenv = None

from rich.console import Console
from rich.table import Table

from .compute.checkpoint import checkpoint_digest
from .config import RunConfig, apply_overrides, load_run_config
from .constants import DEFAULT_EVENTS_NAME, OUTPUT_ROOT_ENV
from .data.dataset import read_prices, write_prices
from .data.synthetic import PROFILES, generate_synthetic, profile_config, summary_stats
from .exceptions import ConfigError, DataFileMissing, DynamicHorizonError, GradientCheckFailed
from .harness.analysis import build_summary, sensitivity_points
from .harness.baselines import run_baselines
from .harness.gradcheck_suite import run_gradcheck_suite, select_cases
from .harness.static_curve import StaticCurve, build_static_curve
from .harness.sweep import run_sweep
from .harness.walk_forward import prepare_market, run_walk_forward
from .runtime.event_bus import EventBus
from .schemas import GradCheckRow
from .storage.event_log import jsonl_sink
from .storage.reports import (
    BASELINE_COLUMNS,
    CURVE_COLUMNS,
    SENSITIVITY_COLUMNS,
    SWEEP_COLUMNS,
    WINDOW_COLUMNS,
    anchors_from_frame,
    baseline_rows,
    points_from_frame,
    read_table,
    sweep_rows,
    window_rows,
    write_table,
)
from .utils.filesystem import write_json
from .utils.fingerprints import sha256_bytes

USAGE_ERRORS = (ConfigError, DataFileMissing)


def main(argv: list[str] | None = None) -> int:
    if load_dotenv is not None:
        load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 2
    try:
        return dispatch(args)
    except USAGE_ERRORS as exc:
        _print_error(exc)
        return 2
    except DynamicHorizonError as exc:
        _print_error(exc)
        return 1


def dispatch(args: argparse.Namespace) -> int:
    if args.command == "gradcheck":
        return cmd_gradcheck(args)
    if args.command == "report":
        return cmd_report(args)

    config = resolve_config(args)
    output_dir = Path(config.paths.output_dir)
    bus = EventBus(run_id=args.command)
    bus.register_sink(jsonl_sink(output_dir / DEFAULT_EVENTS_NAME))
    write_json(output_dir / "effective_config.json", config.to_payload())

    if args.command == "generate":
        return cmd_generate(args, config, bus)
    if args.command == "train":
        return cmd_train(args, config, bus)
    if args.command == "sweep":
        return cmd_sweep(args, config, bus)
    if args.command == "baselines":
        return cmd_baselines(args, config, bus)
    raise ConfigError(f"unknown command: {args.command}")


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """File values, then the output-root env var, then command-line flags."""
    config = load_run_config(args.config)
    overrides: dict[str, Any] = {}
    if getattr(args, "profile", None):
        synthetic, labeling = profile_config(args.profile)
        overrides["synthetic"] = synthetic.model_dump(mode="json") | {"seed": config.synthetic.seed}
        overrides["labeling"] = labeling.model_dump(mode="json")
    env_root = os.getenv(OUTPUT_ROOT_ENV)
    if env_root:
        overrides["paths.output_dir"] = env_root
    overrides.update(
        {
            "seed": getattr(args, "seed", None),
            "paths.output_dir": getattr(args, "output_dir", None) or overrides.get("paths.output_dir"),
            "paths.dataset": getattr(args, "dataset", None),
            "training.mode": getattr(args, "mode", None),
            "loss.horizon": getattr(args, "horizon", None),
            "loss.tau": getattr(args, "tau", None),
            "loss.lambda": getattr(args, "lam", None),
            "loss.confidence": getattr(args, "confidence", None),
            "loss.mask": getattr(args, "mask", None),
            "model.kind": getattr(args, "model", None),
            "sweep.workers": getattr(args, "workers", None),
        }
    )
    return apply_overrides(config, overrides)


def cmd_generate(args: argparse.Namespace, config: RunConfig, bus: EventBus) -> int:
    prices = generate_synthetic(config.synthetic, config.synthetic_seed(), workers=args.workers)
    path = write_prices(prices, config.paths.dataset_path())
    stats = summary_stats(prices)
    bus.publish(event_type="data.generated", stage="generate", message=str(path), payload=stats)
    payload = {"output": str(path), "sha256": sha256_bytes(path.read_bytes()), **stats}
    print(json.dumps(payload, ensure_ascii=False))
    return 0


def _load_market(config: RunConfig, bus: EventBus):
    prices = read_prices(config.paths.dataset_path())
    return prepare_market(prices, config, bus)


def cmd_train(args: argparse.Namespace, config: RunConfig, bus: EventBus) -> int:
    market = _load_market(config, bus)
    output_dir = Path(config.paths.output_dir)
    mode = config.training.mode
    horizon = config.loss.horizon
    result = run_walk_forward(
        market,
        config,
        mode=mode,
        horizon=horizon,
        bus=bus,
        checkpoint_dir=output_dir / "checkpoints",
        run_id=f"train-{mode}",
    )
    static_one = static_full = None
    if mode == "dynamic" and config.training.compare_static and config.model.kind == "seq2seq":
        static_one = run_walk_forward(market, config, mode="static", horizon=1, bus=bus, run_id="static-1").report
        static_full = run_walk_forward(
            market, config, mode="static", horizon=horizon, bus=bus, run_id=f"static-{horizon}"
        ).report
    write_table(window_rows(result.report, static_one, static_full), WINDOW_COLUMNS, output_dir / "windows.csv")
    write_json(output_dir / "report.json", result.report.model_dump(mode="json"))
    print(
        json.dumps(
            {
                "mode": mode,
                "horizon": horizon,
                "beta": market.beta,
                "mean_f1": result.report.mean_f1,
                "mean_avg_len": result.report.mean_avg_len,
                "per_series_avg_len": result.report.per_series_avg_len,
                "final_checkpoint": str(output_dir / "checkpoints" / "final.ckpt"),
                "final_digest": checkpoint_digest(result.params),
            },
            ensure_ascii=False,
        )
    )
    return 0


def _write_sweep_outputs(output_dir: Path, points, curve: StaticCurve, config: RunConfig) -> dict[str, Any]:
    write_table(curve.rows(), CURVE_COLUMNS, output_dir / "curve.csv")
    write_table(sweep_rows(points), SWEEP_COLUMNS, output_dir / "sweep.csv")
    sensitivity = [
        {"tau": p.tau, "avg_len": p.avg_len, "confidence": p.confidence, "mask": p.mask}
        for group in sensitivity_points(points, config.sweep.sensitivity_lambda).values()
        for p in group
    ]
    write_table(sensitivity, SENSITIVITY_COLUMNS, output_dir / "sensitivity.csv")
    summary = build_summary(points, curve, config.sweep.sensitivity_lambda)
    write_json(output_dir / "summary.json", summary)
    return summary


def cmd_sweep(args: argparse.Namespace, config: RunConfig, bus: EventBus) -> int:
    market = _load_market(config, bus)
    output_dir = Path(config.paths.output_dir)
    curve = build_static_curve(market, config, bus=bus)
    points = run_sweep(market, config, curve, bus=bus)
    summary = _write_sweep_outputs(output_dir, points, curve, config)
    print(
        json.dumps(
            {
                "points": summary["points"],
                "failed_points": summary["failed_points"],
                "above_curve_points": summary["above_curve_points"],
                "best": summary["best"],
                "output_dir": str(output_dir),
            },
            ensure_ascii=False,
        )
    )
    return 0


def cmd_baselines(args: argparse.Namespace, config: RunConfig, bus: EventBus) -> int:
    market = _load_market(config, bus)
    output_dir = Path(config.paths.output_dir)
    rows = run_baselines(market, config, bus=bus)
    write_table(baseline_rows(rows), BASELINE_COLUMNS, output_dir / "baselines.csv")
    print(json.dumps({"baselines": [row.model_dump() for row in rows]}, ensure_ascii=False))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    output_dir = Path(args.output_dir or os.getenv(OUTPUT_ROOT_ENV) or RunConfig().paths.output_dir)
    curve = StaticCurve(anchors_from_frame(read_table(output_dir / "curve.csv")))
    points = points_from_frame(read_table(output_dir / "sweep.csv"))
    summary = build_summary(points, curve, args.sensitivity_lambda)
    write_json(output_dir / "summary.json", summary)

    table = Table(title="Dynamic model summary")
    for column in ("Model", "F1 Gap %", "(τ, λ)", "Prediction Length", "F1"):
        table.add_column(column)
    for row in summary["rows"]:
        table.add_row(
            f"{row['architecture']} ({row['mask']})",
            f"{row['f1_gap_pct']:.2f}",
            f"({row['tau']:.2f},{row['lam']:.1f})",
            f"{row['prediction_length']:.2f}",
            f"{row['f1']:.4f}",
        )
    if summary["best"] is not None:
        table.caption = f"best: {summary['best']['rendered']}"
    Console(stderr=True).print(table)
    print(json.dumps({"output": str(output_dir / "summary.json"), "rows": len(summary["rows"]), "best": summary["best"]}, ensure_ascii=False))
    return 0


def cmd_gradcheck(args: argparse.Namespace) -> int:
    cases = select_cases(args.models, args.masks, args.confidences)
    if args.models == [] or args.masks == [] or args.confidences == []:
        cases = []
    rows = run_gradcheck_suite(
        cases,
        seed=args.seed,
        tolerance=args.tolerance,
        per_parameter=args.per_parameter if args.per_parameter > 0 else None,
    )
    _render_gradcheck(rows, args.tolerance)
    failed = [row.name for row in rows if not row.passed]
    print(
        json.dumps(
            {
                "configurations": len(rows),
                "skipped": sum(1 for row in rows if row.skipped),
                "failed": failed,
                "worst": max((row.max_relative_error or 0.0 for row in rows), default=0.0),
            },
            ensure_ascii=False,
        )
    )
    if failed:
        raise GradientCheckFailed(f"{len(failed)} configuration(s) over tolerance {args.tolerance} or unchecked: {', '.join(failed)}")
    return 0


def _render_gradcheck(rows: list[GradCheckRow], tolerance: float) -> None:
    table = Table(title=f"Gradient check (tolerance {tolerance:g})")
    for column in ("Configuration", "Max rel. error", "Worst parameter", "Result"):
        table.add_column(column)
    for row in rows:
        error = "-" if row.max_relative_error is None else f"{row.max_relative_error:.2e}"
        result = "skipped" if row.skipped else ("ok" if row.passed else "FAIL")
        table.add_row(row.name, error, row.worst_parameter or "-", result)
    Console(stderr=True).print(table)


def _print_error(exc: DynamicHorizonError) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, ensure_ascii=False), file=sys.stderr)


def _add_run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None, help="Run config JSON (defaults when omitted)")
    parser.add_argument("--output-dir", default=None)
    parser.add_argument("--dataset", default=None, help="Prices CSV (default: <output-dir>/prices.csv)")
    parser.add_argument("--seed", type=int, default=None)


def _add_loss_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--tau", type=float, default=None)
    parser.add_argument("--lambda", dest="lam", type=float, default=None)
    parser.add_argument("--confidence", default=None, help="maximum|cd|tv|emd (or full names)")
    parser.add_argument("--mask", choices=["indicator", "sigmoid"], default=None)
    parser.add_argument("--horizon", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Dynamic-horizon seq2seq forecasting CLI")
    sub = parser.add_subparsers(dest="command")

    p_gen = sub.add_parser("generate", help="Write a synthetic prices CSV")
    _add_run_options(p_gen)
    p_gen.add_argument("--profile", choices=list(PROFILES), default=None)
    p_gen.add_argument("--workers", type=int, default=1, help="Threads drawing per-series innovations")

    p_train = sub.add_parser("train", help="Walk-forward training and evaluation")
    _add_run_options(p_train)
    _add_loss_options(p_train)
    p_train.add_argument("--mode", choices=["static", "dynamic"], default=None)
    p_train.add_argument("--model", choices=["ffn", "lstm", "seq2seq"], default=None)

    p_sweep = sub.add_parser("sweep", help="Static curve plus (tau, lambda) grid sweep")
    _add_run_options(p_sweep)
    p_sweep.add_argument("--workers", type=int, default=None)

    p_base = sub.add_parser("baselines", help="FFN/LSTM/seq2seq baseline table")
    _add_run_options(p_base)
    _add_loss_options(p_base)

    p_grad = sub.add_parser("gradcheck", help="Finite-difference gradient suite")
    p_grad.add_argument("--models", nargs="*", default=None, help="ffn lstm seq2seq seq2seq+att seq2seq-att")
    p_grad.add_argument("--masks", nargs="*", default=None)
    p_grad.add_argument("--confidences", nargs="*", default=None)
    p_grad.add_argument("--seed", type=int, default=0)
    p_grad.add_argument("--tolerance", type=float, default=1e-4)
    p_grad.add_argument(
        "--per-parameter",
        type=int,
        default=12,
        help="Coordinates probed per parameter tensor (<=0 probes all)",
    )

    p_report = sub.add_parser("report", help="Rebuild summary.json from sweep.csv and curve.csv")
    p_report.add_argument("--output-dir", default=None)
    p_report.add_argument("--sensitivity-lambda", type=float, default=0.1)

    return parser


if __name__ == "__main__":
    raise SystemExit(main())
