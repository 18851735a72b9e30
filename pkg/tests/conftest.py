from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from dynamic_horizon.config import RunConfig, validate_run_config
from dynamic_horizon.data.synthetic import generate_synthetic
from dynamic_horizon.harness.walk_forward import MarketData, prepare_market

TINY_CONFIG = {
    "seed": 5,
    "synthetic": {
        "series_count": 2,
        "ticks_per_day": 20,
        "day_count": 12,
        "base_volatility": [0.001, 0.003],
        "factor_loading": 0.2,
        "degrees_of_freedom": 5.0,
    },
    "model": {"hidden": 4, "input_length": 5, "max_horizon": 3},
    "loss": {"tau": 0.05, "lambda": 0.1, "confidence": "cd", "mask": "sigmoid", "horizon": 3},
    "training": {"batch_size": 16, "eval_batch_size": 64, "compare_static": False},
    "walk_forward": {
        "train_span": 100,
        "test_span": 30,
        "window_count": 3,
        "warm_start_windows": 1,
        "max_epochs": 2,
        "patience": 1,
    },
    "sweep": {
        "taus": [0.05, 0.2],
        "lambdas": [0.1],
        "curve_lengths": [1, 3],
        "sensitivity_lambda": 0.1,
    },
}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_payload() -> dict:
    return json.loads(json.dumps(TINY_CONFIG))


@pytest.fixture
def tiny_config(tiny_payload: dict) -> RunConfig:
    return validate_run_config(tiny_payload)


@pytest.fixture
def tiny_market(tiny_config: RunConfig) -> MarketData:
    prices = generate_synthetic(tiny_config.synthetic, tiny_config.synthetic_seed())
    return prepare_market(prices, tiny_config)


@pytest.fixture
def tiny_config_file(tmp_path: Path, tiny_payload: dict) -> Path:
    path = tmp_path / "tiny.json"
    path.write_text(json.dumps(tiny_payload), encoding="utf-8")
    return path
