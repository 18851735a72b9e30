"""Configuration models for data, models, losses and experiments."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .constants import DEFAULT_DATASET_NAME, DEFAULT_OUTPUT_DIR, NUM_CLASSES, STATIC_ANCHOR_LENGTHS, VOLATILITY_KINDS
from .exceptions import ConfigError

ConfidenceKind = Literal["maximum", "confidence_distance", "total_variation", "emd"]
MaskMode = Literal["indicator", "sigmoid"]
ModelKind = Literal["ffn", "lstm", "seq2seq"]
TrainMode = Literal["static", "dynamic"]

CONFIDENCE_ALIASES = {
    "max": "maximum",
    "cd": "confidence_distance",
    "tv": "total_variation",
    "wasserstein": "emd",
}


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class RegimeSegment(_Section):
    """Volatility multipliers applied from ``start_day`` until the next segment."""

    start_day: int = Field(0, ge=0)
    multipliers: list[float] = Field(default_factory=lambda: [1.0])

    @field_validator("multipliers")
    @classmethod
    def _positive(cls, value: list[float]) -> list[float]:
        if not value or any(m <= 0 for m in value):
            raise ValueError("regime multipliers must be positive")
        return value


class SyntheticConfig(_Section):
    series_count: int = 4
    ticks_per_day: int = Field(78, gt=1)
    day_count: int = Field(80, gt=1)
    base_volatility: list[float] | None = None
    default_volatility: float = Field(0.001, gt=0)
    regimes: list[RegimeSegment] = Field(default_factory=list)
    factor_loading: float = Field(0.3, ge=-1.0, le=1.0)
    degrees_of_freedom: float = 4.0
    seed: int | None = None

    @field_validator("series_count")
    @classmethod
    def _series_positive(cls, value: int) -> int:
        if value <= 0:
            raise ValueError("series_count must be a positive integer")
        return value

    @field_validator("degrees_of_freedom")
    @classmethod
    def _df_above_two(cls, value: float) -> float:
        if value <= 2:
            raise ValueError("degrees_of_freedom must exceed 2 for a finite variance")
        return value

    @model_validator(mode="after")
    def _check_lengths(self) -> "SyntheticConfig":
        if self.base_volatility is not None:
            if len(self.base_volatility) != self.series_count:
                raise ValueError("base_volatility needs one entry per series")
            if any(v <= 0 for v in self.base_volatility):
                raise ValueError("base_volatility entries must be positive")
        for segment in self.regimes:
            if len(segment.multipliers) not in (1, self.series_count):
                raise ValueError("regime multipliers need 1 or series_count entries")
        return self

    def volatilities(self) -> list[float]:
        if self.base_volatility is not None:
            return list(self.base_volatility)
        return [self.default_volatility] * self.series_count


class LabelingConfig(_Section):
    beta: float | None = None
    target_middle_fraction: float = 0.5
    num_classes: Literal[5] = NUM_CLASSES

    @field_validator("beta")
    @classmethod
    def _beta_open_unit(cls, value: float | None) -> float | None:
        if value is not None and not 0.0 < value < 1.0:
            raise ValueError("beta must lie in (0, 1)")
        return value


class ModelConfig(_Section):
    kind: ModelKind = "seq2seq"
    series_count: int | None = None
    num_classes: Literal[5] = NUM_CLASSES
    hidden: int = Field(64, gt=0)
    input_length: int | None = None
    max_horizon: int = Field(10, gt=0)
    attention: bool = True
    layers: int | None = None

    @field_validator("input_length", "layers", "series_count")
    @classmethod
    def _positive_or_none(cls, value: int | None) -> int | None:
        if value is not None and value <= 0:
            raise ValueError("must be a positive integer")
        return value

    def resolved(self, series_count: int | None = None) -> "ModelConfig":
        """Fill architecture defaults: seq2seq T̄=20 with 1+1 layers, ffn T̄=10, two layers otherwise."""
        q = self.series_count or series_count
        if q is None:
            raise ConfigError("model.series_count is not set")
        default_length = 10 if self.kind == "ffn" else 20
        default_layers = 1 if self.kind == "seq2seq" else 2
        return self.model_copy(
            update={
                "series_count": q,
                "input_length": self.input_length or default_length,
                "layers": self.layers or default_layers,
            }
        )


class DynamicLossConfig(_Section):
    tau: float = 0.3
    lam: float = Field(0.1, alias="lambda", ge=0.0)
    k: float = Field(10.0, gt=0.0)
    confidence: ConfidenceKind = "confidence_distance"
    mask: MaskMode = "sigmoid"
    horizon: int = Field(10, gt=0)

    @field_validator("confidence", mode="before")
    @classmethod
    def _expand_alias(cls, value: Any) -> Any:
        if isinstance(value, str):
            return CONFIDENCE_ALIASES.get(value.lower(), value.lower())
        return value

    @model_validator(mode="after")
    def _check_tau(self) -> "DynamicLossConfig":
        if self.is_volatility:
            if self.tau <= 0:
                raise ValueError("tau must be positive for total_variation/emd")
        else:
            if not 0.0 <= self.tau <= 1.0:
                raise ValueError("tau must lie in [0, 1] for maximum/confidence_distance")
            if self.mask == "sigmoid" and self.tau >= 1.0:
                raise ValueError("sigmoid masking needs tau < 1 for maximum/confidence_distance")
        return self

    @property
    def is_volatility(self) -> bool:
        return self.confidence in VOLATILITY_KINDS

    @property
    def threshold(self) -> float:
        """θ: τ for confidence kinds, −τ for the negated volatility kinds."""
        return -self.tau if self.is_volatility else self.tau

    @property
    def sigmoid_scale(self) -> float:
        return 1.0 if self.is_volatility else 1.0 - self.tau


class TrainingConfig(_Section):
    mode: TrainMode = "dynamic"
    batch_size: int = Field(64, gt=0)
    optimizer: Literal["auto", "sgd", "adam"] = "auto"
    learning_rate: float | None = None
    validation_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    compare_static: bool = True
    eval_batch_size: int = Field(512, gt=0)
    # Static teacher-forced KL epochs that precede dynamic training.
    pretrain_epochs: int = Field(3, ge=0)

    def optimizer_for(self, kind: ModelKind) -> tuple[Literal["sgd", "adam"], float]:
        name = self.optimizer
        if name == "auto":
            name = "sgd" if kind == "ffn" else "adam"
        lr = self.learning_rate if self.learning_rate is not None else (0.05 if name == "sgd" else 1e-3)
        return name, lr


class WalkForwardConfig(_Section):
    train_span: int = Field(2000, gt=0)
    test_span: int = Field(390, gt=0)
    step: int | None = None
    window_count: int = Field(10, gt=0)
    warm_start_windows: int = Field(5, ge=0)
    max_epochs: int = Field(20, gt=0)
    patience: int = Field(3, gt=0)
    seed: int | None = None

    @model_validator(mode="after")
    def _check_warm(self) -> "WalkForwardConfig":
        if self.warm_start_windows >= self.window_count:
            raise ValueError("warm_start_windows must be smaller than window_count")
        if self.step is not None and self.step <= 0:
            raise ValueError("step must be positive")
        return self

    @property
    def stride(self) -> int:
        return self.step or self.test_span

    def required_ticks(self) -> int:
        return self.train_span + self.test_span + (self.window_count - 1) * self.stride


class SweepConfig(_Section):
    taus: list[float] = Field(default_factory=lambda: [0.05, 0.1, 0.2, 0.3, 0.4, 0.5])
    lambdas: list[float] = Field(default_factory=lambda: [0.1, 0.5, 1.0])
    confidences: list[ConfidenceKind] = Field(default_factory=lambda: ["confidence_distance"])
    masks: list[MaskMode] = Field(default_factory=lambda: ["sigmoid"])
    curve_lengths: list[int] = Field(default_factory=lambda: list(STATIC_ANCHOR_LENGTHS))
    sensitivity_lambda: float = 0.1
    workers: int = Field(1, gt=0)

    @field_validator("confidences", mode="before")
    @classmethod
    def _expand_aliases(cls, value: Any) -> Any:
        if isinstance(value, list):
            return [CONFIDENCE_ALIASES.get(str(v).lower(), str(v).lower()) for v in value]
        return value

    @field_validator("taus", "lambdas", "curve_lengths", "confidences", "masks")
    @classmethod
    def _non_empty(cls, value: list[Any]) -> list[Any]:
        if not value:
            raise ValueError("grid must not be empty")
        return value


class PathsConfig(_Section):
    output_dir: Path = DEFAULT_OUTPUT_DIR
    dataset: Path | None = None

    def dataset_path(self) -> Path:
        return self.dataset if self.dataset is not None else self.output_dir / DEFAULT_DATASET_NAME


class RunConfig(_Section):
    seed: int = 7
    synthetic: SyntheticConfig = Field(default_factory=SyntheticConfig)
    labeling: LabelingConfig = Field(default_factory=LabelingConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    loss: DynamicLossConfig = Field(default_factory=DynamicLossConfig)
    training: TrainingConfig = Field(default_factory=TrainingConfig)
    walk_forward: WalkForwardConfig = Field(default_factory=WalkForwardConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    paths: PathsConfig = Field(default_factory=PathsConfig)

    def resolved_model(self) -> ModelConfig:
        return self.model.resolved(self.synthetic.series_count)

    def synthetic_seed(self) -> int:
        return self.synthetic.seed if self.synthetic.seed is not None else self.seed

    def walk_forward_seed(self) -> int:
        return self.walk_forward.seed if self.walk_forward.seed is not None else self.seed

    def to_payload(self) -> dict[str, Any]:
        return self.model_dump(mode="json", by_alias=True)


def load_run_config(path: str | Path | None = None) -> RunConfig:
    """Load a run config from JSON; ``None`` yields all defaults."""
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {p}")
    try:
        payload = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {p}: {exc}") from exc
    return validate_run_config(payload)


def validate_run_config(payload: Any) -> RunConfig:
    if not isinstance(payload, dict):
        raise ConfigError("config root must be a JSON object")
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc


def apply_overrides(config: RunConfig, overrides: dict[str, Any]) -> RunConfig:
    """Return a new config with dotted-key overrides (``"loss.tau"``) applied."""
    payload = config.to_payload()
    for dotted, value in overrides.items():
        if value is None:
            continue
        node = payload
        *parents, leaf = dotted.split(".")
        for key in parents:
            node = node.setdefault(key, {})
        node[leaf] = value
    return validate_run_config(payload)


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for error in exc.errors():
        location = ".".join(str(item) for item in error.get("loc", ()))
        parts.append(f"{location}: {error.get('msg')}")
    return "; ".join(parts)

