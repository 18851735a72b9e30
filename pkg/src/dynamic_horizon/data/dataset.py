"""Price CSV files: header ``tick,series_0,...,series_{Q-1}``."""

from __future__ import annotations

from pathlib import Path

import pandas as pd

from ..exceptions import DataError, DataFileMissing
from ..utils.filesystem import ensure_parent


def write_prices(prices: pd.DataFrame, path: str | Path) -> Path:
    p = Path(path)
    ensure_parent(p)
    frame = prices.copy()
    frame.index.name = "tick"
    frame.to_csv(p, float_format="%.10f", lineterminator="\n")
    return p


def read_prices(path: str | Path) -> pd.DataFrame:
    p = Path(path)
    if not p.exists():
        raise DataFileMissing(f"dataset not found: {p}")
    frame = pd.read_csv(p)
    if not len(frame.columns) or frame.columns[0] != "tick":
        raise DataError(f"{p}: first column must be 'tick'")
    expected = [f"series_{q}" for q in range(len(frame.columns) - 1)]
    if list(frame.columns[1:]) != expected or not expected:
        raise DataError(f"{p}: expected columns tick,{','.join(expected) or 'series_0'}")
    return frame.set_index("tick").astype(float)
