"""Returns, previous-day statistics and five-class labels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ..exceptions import CalibrationError, DataError, LabelingError

UNLABELED = -1


@dataclass
class DailyStats:
    """Mean and population std of each day's returns, shape (days, series)."""

    mean: np.ndarray
    std: np.ndarray


def compute_returns(prices: pd.DataFrame | np.ndarray) -> np.ndarray:
    """Simple returns p_t / p_{t-1} - 1 along the first axis."""
    values = prices.to_numpy(dtype=np.float64) if isinstance(prices, pd.DataFrame) else np.asarray(prices, dtype=np.float64)
    if values.shape[0] < 2:
        raise DataError("need at least two prices to compute a return")
    if np.any(values <= 0):
        raise DataError("prices must be positive")
    return values[1:] / values[:-1] - 1.0


def _as_matrix(returns: np.ndarray) -> np.ndarray:
    r = np.asarray(returns, dtype=np.float64)
    return r[:, None] if r.ndim == 1 else r


def daily_stats(returns: np.ndarray, ticks_per_day: int) -> DailyStats:
    r = _as_matrix(returns)
    day = np.arange(r.shape[0]) // ticks_per_day
    grouped = pd.DataFrame(r).groupby(day)
    return DailyStats(mean=grouped.mean().to_numpy(), std=grouped.std(ddof=0).to_numpy())


def boundaries(mu: float, sigma: float, beta: float) -> np.ndarray:
    return np.array([mu - sigma, mu - beta * sigma, mu + beta * sigma, mu + sigma])


def label_return(x: float, mu: float, sigma: float, beta: float) -> int:
    """0 large down, 1 small down, 2 insignificant, 3 small up, 4 large up."""
    if not sigma > 0:
        raise LabelingError(f"degenerate day: sigma={sigma}")
    return int(np.searchsorted(boundaries(mu, sigma, beta), x, side="right"))


def label_values(x: np.ndarray, mu: np.ndarray, sigma: np.ndarray, beta: float) -> np.ndarray:
    """Vectorized :func:`label_return` over broadcastable arrays."""
    x, mu, sigma = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (x, mu, sigma)))
    if np.any(sigma <= 0):
        raise LabelingError("degenerate day: sigma=0")
    return (
        (x >= mu - sigma).astype(np.int64)
        + (x >= mu - beta * sigma)
        + (x >= mu + beta * sigma)
        + (x >= mu + sigma)
    )


def _previous_day_stats(returns: np.ndarray, ticks_per_day: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = _as_matrix(returns)
    stats = daily_stats(r, ticks_per_day)
    day = np.arange(r.shape[0]) // ticks_per_day
    labeled = day >= 1
    prev = np.clip(day - 1, 0, None)
    mu, sigma = stats.mean[prev], stats.std[prev]
    degenerate = labeled[:, None] & (sigma <= 0)
    if np.any(degenerate):
        tick, series = np.argwhere(degenerate)[0]
        raise LabelingError(f"degenerate day {day[tick] - 1} for series {series}: sigma=0")
    return r, np.where(labeled[:, None], mu, 0.0), np.where(labeled[:, None], sigma, 1.0)


def label_series(returns: np.ndarray, ticks_per_day: int, beta: float) -> np.ndarray:
    """Labels of shape (ticks, series); day D+1 uses day D stats, day 0 is unlabeled."""
    r, mu, sigma = _previous_day_stats(returns, ticks_per_day)
    labels = label_values(r, mu, sigma, beta)
    labels[: min(ticks_per_day, r.shape[0])] = UNLABELED
    return labels


def standardized_returns(returns: np.ndarray, ticks_per_day: int) -> np.ndarray:
    """(x − μ_D) / σ_D for every tick after day 0, flattened."""
    r, mu, sigma = _previous_day_stats(returns, ticks_per_day)
    return ((r - mu) / sigma)[ticks_per_day:].reshape(-1)


def middle_fraction(z: np.ndarray, beta: float) -> float:
    return float(np.mean((z >= -beta) & (z < beta)))


def calibrate_beta(
    z: np.ndarray,
    target: float = 0.5,
    *,
    tolerance: float = 0.005,
    max_iter: int = 50,
) -> float:
    """Bisect β ∈ (0, 1) until the middle class holds ``target`` of ``z``.

    ``z`` are standardized returns as produced by :func:`standardized_returns`.
    """
    values = np.asarray(z, dtype=np.float64).reshape(-1)
    if values.size == 0:
        raise CalibrationError("no returns to calibrate on")
    if not 0.0 < target < 1.0:
        raise CalibrationError(f"target middle fraction must lie in (0, 1), got {target}")
    if middle_fraction(values, 1.0) < target:
        raise CalibrationError(f"middle fraction {target} is unattainable with beta < 1")
    low, high = 0.0, 1.0
    beta = 0.5
    for _ in range(max_iter):
        beta = 0.5 * (low + high)
        fraction = middle_fraction(values, beta)
        if abs(fraction - target) <= tolerance:
            break
        if fraction < target:
            low = beta
        else:
            high = beta
    return beta


def class_masses(labels: np.ndarray, num_classes: int = 5) -> list[float]:
    valid = np.asarray(labels)[np.asarray(labels) >= 0]
    if valid.size == 0:
        return [0.0] * num_classes
    return (np.bincount(valid, minlength=num_classes) / valid.size).tolist()
