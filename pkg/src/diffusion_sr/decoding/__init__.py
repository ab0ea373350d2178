"""Turning a trained denoiser plus data points into candidate equations."""

from .refinement import RefinementResult, fitting_loss, refine_constants
from .sampling import (
    LogitMatrix,
    SampleResult,
    greedy_decode,
    one_hot_logits,
    point_condition,
    sample_sequences,
    sample_x0,
    trace_denoising,
    valid_rate_by_steps,
)
from .topk import TopKResult, decode_candidate, top_k_solve

__all__ = [
    "LogitMatrix",
    "RefinementResult",
    "SampleResult",
    "TopKResult",
    "decode_candidate",
    "fitting_loss",
    "greedy_decode",
    "one_hot_logits",
    "point_condition",
    "refine_constants",
    "sample_sequences",
    "sample_x0",
    "top_k_solve",
    "trace_denoising",
    "valid_rate_by_steps",
]
