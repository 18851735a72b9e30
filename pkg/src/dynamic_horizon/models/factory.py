"""Model construction from config."""

from __future__ import annotations

from ..config import ModelConfig
from .base import SequenceModel
from .baselines import FeedForwardModel, StackedLSTMModel
from .seq2seq import Seq2SeqModel


def build_model(config: ModelConfig, series_count: int | None = None) -> SequenceModel:
    resolved = config.resolved(series_count)
    if resolved.kind == "ffn":
        return FeedForwardModel(resolved)
    if resolved.kind == "lstm":
        return StackedLSTMModel(resolved)
    return Seq2SeqModel(resolved)
