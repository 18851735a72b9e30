"""Forecasting architectures."""

from .attention import attend
from .base import SequenceModel
from .baselines import FeedForwardModel, StackedLSTMModel
from .factory import build_model
from .lstm import lstm_step
from .seq2seq import Seq2SeqModel

__all__ = [
    "FeedForwardModel",
    "Seq2SeqModel",
    "SequenceModel",
    "StackedLSTMModel",
    "attend",
    "build_model",
    "lstm_step",
]
