"""
Checkpoint container.

A checkpoint is a ``torch.save`` dictionary holding the format version, the
run config, the vocabulary table and its hash, the noise schedule, the
weights and the EMA weights.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import torch

from ..config.run_config import RunConfig
from ..errors import DataError
from ..symbolic.tokenizer import Vocabulary
from .networks import Denoiser
from .schedule import NoiseSchedule, make_schedule

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass
class LoadedModel:
    """A denoiser ready for inference together with everything it needs."""

    model: Denoiser
    vocab: Vocabulary
    schedule: NoiseSchedule
    config: RunConfig
    path: Optional[Path] = None

    @property
    def canvas_length(self) -> int:
        return self.model.canvas_length


def build_model(config: RunConfig, vocab: Vocabulary) -> Denoiser:
    return Denoiser(
        vocab.size,
        config.canvas_length(),
        config.model,
        max_dims=config.data.max_dims,
        mantissa_digits=config.data.mantissa_digits,
    )


def build_untrained(config: RunConfig, seed: int = 0) -> LoadedModel:
    """Randomly initialised model; useful for pipeline checks."""
    torch.manual_seed(seed)
    vocab = config.data.vocabulary()
    model = build_model(config, vocab).eval()
    schedule = make_schedule(config.model.diffusion_steps, config.model.schedule, config.model.schedule_offset)
    return LoadedModel(model, vocab, schedule, config)


def save_checkpoint(
    path: str | Path,
    model: Denoiser,
    config: RunConfig,
    vocab: Vocabulary,
    schedule: NoiseSchedule,
    ema_state: Optional[dict[str, torch.Tensor]] = None,
    extra: Optional[dict[str, Any]] = None,
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "config": config.model_dump(mode="json"),
        "vocab": vocab.to_json(),
        "vocab_hash": vocab.hash,
        "schedule": schedule.to_dict(),
        "state_dict": model.state_dict(),
        "ema_state_dict": ema_state if ema_state is not None else model.state_dict(),
        "extra": extra or {},
    }
    torch.save(payload, path)
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(
    path: str | Path, use_ema: bool = True, device: str = "cpu"
) -> LoadedModel:
    """Load a checkpoint for inference; EMA weights by default."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Checkpoint not found: {path}")
    payload = torch.load(path, map_location=device, weights_only=True)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise DataError(f"Unsupported checkpoint version {payload.get('format_version')}")
    config = RunConfig.model_validate(payload["config"])
    vocab = Vocabulary.from_json(payload["vocab"])
    if vocab.hash != payload["vocab_hash"]:
        raise DataError(f"Vocabulary hash mismatch in {path}")
    model = build_model(config, vocab)
    state = payload["ema_state_dict"] if use_ema else payload["state_dict"]
    model.load_state_dict(state)
    model.to(device).eval()
    schedule = NoiseSchedule.from_dict(payload["schedule"])
    logger.info(f"Loaded checkpoint {path} (vocab {vocab.hash}, T={schedule.T}, ema={use_ema})")
    return LoadedModel(model, vocab, schedule, config, path)
