"""Configuration: environment settings and versioned run configs."""

from .run_config import (
    SCHEMA_VERSION,
    BenchConfig,
    DataConfig,
    DecodeConfig,
    GpConfig,
    GuidanceConfig,
    ModelConfig,
    RunConfig,
    TrainConfig,
    apply_overrides,
    load_run_config,
)
from .simple_settings import Settings, settings

__all__ = [
    "SCHEMA_VERSION",
    "BenchConfig",
    "DataConfig",
    "DecodeConfig",
    "GpConfig",
    "GuidanceConfig",
    "ModelConfig",
    "RunConfig",
    "Settings",
    "TrainConfig",
    "apply_overrides",
    "load_run_config",
    "settings",
]
