"""Experiment harness: training, walk-forward, curves, sweeps and reports."""

from .analysis import build_summary, f1_gap, sensitivity_fit, summary_rows
from .baselines import run_baselines
from .gradcheck_suite import default_cases, run_gradcheck_suite, select_cases
from .metrics import f1_macro
from .static_curve import StaticCurve, build_static_curve
from .sweep import run_sweep, sweep_grid
from .training import Trainer, TrainingPlan
from .walk_forward import MarketData, prepare_market, run_walk_forward

__all__ = [
    "MarketData",
    "StaticCurve",
    "Trainer",
    "TrainingPlan",
    "build_static_curve",
    "build_summary",
    "default_cases",
    "f1_gap",
    "f1_macro",
    "prepare_market",
    "run_baselines",
    "run_gradcheck_suite",
    "run_sweep",
    "run_walk_forward",
    "select_cases",
    "sensitivity_fit",
    "summary_rows",
    "sweep_grid",
]
