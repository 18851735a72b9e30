"""Project-wide constants."""

from __future__ import annotations

from pathlib import Path

NUM_CLASSES = 5

LOG_FLOOR = 1e-12
INIT_SCALE = 0.08
START_PRICE = 100.0

CHECKPOINT_MAGIC = b"DPLS2S01"

DEFAULT_OUTPUT_DIR = Path("data/runs/latest")
DEFAULT_DATASET_NAME = "prices.csv"
DEFAULT_EVENTS_NAME = "events.jsonl"
OUTPUT_ROOT_ENV = "DYNH_OUTPUT_ROOT"

STATIC_ANCHOR_LENGTHS = (1, 4, 7, 10)

CONFIDENCE_KINDS = ("maximum", "confidence_distance", "total_variation", "emd")
VOLATILITY_KINDS = frozenset({"total_variation", "emd"})
CONFIDENCE_ABBREVIATIONS = {
    "maximum": "Max",
    "confidence_distance": "CD",
    "total_variation": "TV",
    "emd": "EMD",
}
