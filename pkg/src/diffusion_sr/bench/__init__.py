"""Evaluation metrics and benchmark problems.

The harness lives in ``bench.harness`` and is imported explicitly.
"""

from .metrics import complexity_entropy, r2, rmse, self_bleu, valid_rate
from .problems import BenchmarkProblem, SamplingSpec, load_benchmark, load_problems

__all__ = [
    "BenchmarkProblem",
    "SamplingSpec",
    "complexity_entropy",
    "load_benchmark",
    "load_problems",
    "r2",
    "rmse",
    "self_bleu",
    "valid_rate",
]
