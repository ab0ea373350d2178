"""
Versioned run configuration.

A ``RunConfig`` is loaded from an optional JSON file and then patched with
dotted ``section.field=value`` overrides from the command line. Every
results file embeds the dumped config so a run can be reproduced exactly.
"""

import json
import logging
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..errors import UsageError
from ..symbolic.expression import Limits
from ..symbolic.tokenizer import Vocabulary, VocabMode

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", validate_assignment=True)


class DataConfig(_Section):
    """Corpus generation and vocabulary parameters."""

    mode: VocabMode = VocabMode.SKELETON
    count: int = Field(default=50_000, ge=0)
    seed: int = 0
    max_dims: int = Field(default=3, ge=1, le=3)
    num_variables: int = Field(default=3, ge=1, le=9)
    integer_bound: int = Field(default=10, ge=0)
    mantissa_digits: int = Field(default=4, ge=1, le=4)
    max_length: int = Field(default=20, ge=1)
    max_internal_nodes: int = Field(default=5, ge=0)
    max_height: int = Field(default=7, ge=1)
    n_min: int = Field(default=50, ge=1)
    n_max: int = Field(default=1000, ge=1)
    input_low: float = -10.0
    input_high: float = 10.0
    additive_low: float = -10.0
    additive_high: float = 10.0
    multiplicative_low: float = Field(default=0.05, gt=0)
    multiplicative_high: float = Field(default=10.0, gt=0)
    max_abs_target: float = Field(default=1e10, gt=0)
    min_acceptance: float = Field(default=0.05, ge=0, le=1)
    dedup: bool = False
    shard_size: int = Field(default=1000, ge=1)

    @model_validator(mode="after")
    def _check_ranges(self) -> "DataConfig":
        if self.n_min > self.n_max:
            raise ValueError("data.n_min must not exceed data.n_max")
        if self.input_low >= self.input_high:
            raise ValueError("data.input_low must be below data.input_high")
        if self.multiplicative_low >= self.multiplicative_high:
            raise ValueError("data.multiplicative_low must be below data.multiplicative_high")
        return self

    @property
    def limits(self) -> Limits:
        return Limits(self.max_length, self.max_internal_nodes, self.max_height)

    def vocabulary(self, mode: Optional[VocabMode] = None) -> Vocabulary:
        return Vocabulary(
            mode=mode or self.mode,
            num_variables=self.num_variables,
            integer_bound=self.integer_bound,
            mantissa_digits=self.mantissa_digits,
        )


class ModelConfig(_Section):
    """Denoiser, point encoder and noise schedule dimensions."""

    d_embed: int = Field(default=32, ge=1)
    d_model: int = Field(default=128, ge=8)
    n_layers: int = Field(default=4, ge=1)
    n_heads: int = Field(default=4, ge=1)
    encoder_layers: int = Field(default=2, ge=1)
    encoder_heads: int = Field(default=4, ge=1)
    numeric_embed: int = Field(default=16, ge=1)
    ffn_multiplier: int = Field(default=4, ge=1)
    dropout: float = Field(default=0.0, ge=0, lt=1)
    diffusion_steps: int = Field(default=200, ge=2)
    schedule: Literal["sqrt"] = "sqrt"
    schedule_offset: float = Field(default=1e-4, gt=0)
    time_embedding: Literal["sinusoidal", "learned"] = "sinusoidal"
    canvas_length: Optional[int] = Field(default=None, ge=1)
    conditional: bool = True

    @model_validator(mode="after")
    def _check_heads(self) -> "ModelConfig":
        if self.d_model % self.n_heads or self.d_model % self.encoder_heads:
            raise ValueError("model.d_model must be divisible by the head counts")
        return self


class TrainConfig(_Section):
    steps: int = Field(default=2000, ge=1)
    batch_size: int = Field(default=128, ge=1)
    learning_rate: float = Field(default=1e-3, gt=0)
    weight_decay: float = Field(default=0.0, ge=0)
    ema_decay: float = Field(default=0.9999, ge=0, le=1)
    grad_clip: Optional[float] = Field(default=1.0, gt=0)
    max_points: int = Field(default=200, ge=1)
    null_condition_rate: float = Field(default=0.1, ge=0, le=1)
    log_every: int = Field(default=100, ge=1)
    seed: int = 0


class DecodeConfig(_Section):
    top_k: int = Field(default=20, ge=1)
    seed: int = 0
    clamp_each_step: bool = True
    placeholder_value: float = 1.0
    bfgs_maxiter: int = Field(default=200, ge=1)
    bfgs_gtol: float = Field(default=1e-8, gt=0)
    restarts: int = Field(default=3, ge=0)
    restart_low: float = -5.0
    restart_high: float = 5.0
    n_samples: int = Field(default=100, ge=1)
    trace_steps: list[int] = Field(default_factory=list)


class GpConfig(_Section):
    """Evolutionary parameters."""

    population: int = Field(default=300, ge=2)
    generations: int = Field(default=300, ge=0)
    crossover_rate: float = Field(default=0.5, ge=0, le=1)
    mutation_rate: float = Field(default=0.5, ge=0, le=1)
    max_height: int = Field(default=7, ge=1)
    init_min_height: int = Field(default=2, ge=0)
    init_max_height: int = Field(default=6, ge=0)
    tournament_size: int = Field(default=3, ge=1)
    constant_probability: float = Field(default=0.2, ge=0, le=1)
    constant_low: int = -5
    constant_high: int = 5
    refine_best: bool = True
    early_stop_r2: Optional[float] = None

    @model_validator(mode="after")
    def _check_heights(self) -> "GpConfig":
        if self.init_min_height > self.init_max_height:
            raise ValueError("gp.init_min_height must not exceed gp.init_max_height")
        if self.init_max_height > self.max_height:
            raise ValueError("gp.init_max_height must not exceed gp.max_height")
        return self


class GuidanceConfig(_Section):
    """Diffusion guidance of GP mutation."""

    delta: float = Field(default=0.5, ge=0, le=1)
    seed_size: int = Field(default=10, ge=0)
    grow_height: int = Field(default=7, ge=1)
    islands: int = Field(default=10, ge=1)
    grow_mask: Literal["node", "operator"] = "node"


class BenchConfig(_Section):
    suite: str = "nguyen"
    solver: Literal["top_k", "guided_gp", "classic_gp"] = "classic_gp"
    seeds: list[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4])
    split_seed: int = 0
    train_fraction: float = Field(default=0.75, gt=0, lt=1)
    sampler: Optional[Literal["U", "E"]] = None
    problems: list[str] = Field(default_factory=list)


class RunConfig(_Section):
    """Complete configuration of one command invocation."""

    schema_version: int = SCHEMA_VERSION
    corpus_path: Optional[str] = None
    checkpoint_path: Optional[str] = None
    output_dir: Optional[str] = None
    workers: Optional[int] = Field(default=None, ge=1)
    device: Optional[str] = None
    data: DataConfig = Field(default_factory=DataConfig)
    model: ModelConfig = Field(default_factory=ModelConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    decode: DecodeConfig = Field(default_factory=DecodeConfig)
    gp: GpConfig = Field(default_factory=GpConfig)
    guidance: GuidanceConfig = Field(default_factory=GuidanceConfig)
    bench: BenchConfig = Field(default_factory=BenchConfig)

    @model_validator(mode="after")
    def _check_version(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(
                f"Unsupported schema_version {self.schema_version}; expected {SCHEMA_VERSION}"
            )
        if self.guidance.seed_size > self.gp.population:
            raise ValueError("guidance.seed_size must not exceed gp.population")
        return self

    def canvas_length(self) -> int:
        if self.model.canvas_length is not None:
            return self.model.canvas_length
        return self.data.vocabulary().default_canvas_length


def _parse_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(payload: dict[str, Any], overrides: list[str]) -> dict[str, Any]:
    """Apply ``a.b.c=value`` overrides to a config dictionary in place.

    Values are read as JSON when possible (``64``, ``true``, ``[0,1]``) and
    as plain strings otherwise.
    """
    for item in overrides:
        if "=" not in item:
            raise UsageError(f"Override {item!r} must look like section.field=value")
        key, raw = item.split("=", 1)
        parts = [p for p in key.strip().split(".") if p]
        if not parts:
            raise UsageError(f"Override {item!r} has an empty key")
        target = payload
        for part in parts[:-1]:
            node = target.setdefault(part, {})
            if not isinstance(node, dict):
                raise UsageError(f"Override {item!r}: {part!r} is not a section")
            target = node
        target[parts[-1]] = _parse_value(raw.strip())
    return payload


def load_run_config(
    path: Optional[str | Path] = None, overrides: Optional[list[str]] = None
) -> RunConfig:
    """Load, patch and validate a run configuration."""
    payload: dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.exists():
            raise UsageError(f"Config file not found: {path}")
        try:
            payload = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise UsageError(f"Config file {path} is not valid JSON: {e}") from e
        logger.info(f"Loaded run config from {path}")
    apply_overrides(payload, overrides or [])
    try:
        return RunConfig.model_validate(payload)
    except ValidationError as e:
        raise UsageError(f"Invalid configuration: {e}") from e
