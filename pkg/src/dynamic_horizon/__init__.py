"""Dynamic-horizon seq2seq forecasting engine and experiment harness."""

from .config import RunConfig, load_run_config
from .schemas import RunReport, SweepPoint, WindowReport

__all__ = [
    "RunConfig",
    "RunReport",
    "SweepPoint",
    "WindowReport",
    "load_run_config",
]
