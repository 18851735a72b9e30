"""Synthetic market data, labels and windows."""

from .dataset import read_prices, write_prices
from .labeling import calibrate_beta, compute_returns, daily_stats, label_return, label_series, standardized_returns
from .synthetic import generate_synthetic, profile_config
from .windows import LabeledWindow, WindowSet, make_windows, normalize

__all__ = [
    "LabeledWindow",
    "WindowSet",
    "calibrate_beta",
    "compute_returns",
    "daily_stats",
    "generate_synthetic",
    "label_return",
    "label_series",
    "make_windows",
    "normalize",
    "profile_config",
    "read_prices",
    "standardized_returns",
    "write_prices",
]
