"""Continuous-embedding diffusion model over expression token canvases."""

from .checkpoint import LoadedModel, build_untrained, load_checkpoint, save_checkpoint
from .networks import Denoiser, PointEncoder, tokenize_points
from .process import (
    build_condition,
    diffusion_loss,
    embed_sequence,
    predict_x0,
    q_sample,
    reverse_step,
    round_logits,
)
from .schedule import NoiseSchedule, make_schedule
from .trainer import TrainResult, train

__all__ = [
    "Denoiser",
    "LoadedModel",
    "NoiseSchedule",
    "PointEncoder",
    "TrainResult",
    "build_condition",
    "build_untrained",
    "diffusion_loss",
    "embed_sequence",
    "load_checkpoint",
    "make_schedule",
    "predict_x0",
    "q_sample",
    "reverse_step",
    "round_logits",
    "save_checkpoint",
    "tokenize_points",
    "train",
]
