"""
Reverse-process sampling, rounding to logit matrices and greedy decoding.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import torch

from ..data.points import PointSet
from ..diffusion.checkpoint import LoadedModel
from ..diffusion.networks import tokenize_points
from ..diffusion.process import reverse_step, round_logits
from ..symbolic.expression import Expression
from ..symbolic.tokenizer import TokenSequence, Vocabulary, encode_expression, is_valid_prefix

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-6


@dataclass(frozen=True)
class LogitMatrix:
    """Per-position token probabilities (L x N_vocab)."""

    probs: np.ndarray
    vocab_hash: str

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64)
        if probs.ndim != 2:
            raise ValueError(f"Expected an L x V matrix, got shape {probs.shape}")
        if (probs < 0).any():
            raise ValueError("Probabilities must be non-negative")
        if np.abs(probs.sum(axis=1) - 1.0).max() > ROW_SUM_TOLERANCE:
            raise ValueError("Probability rows must sum to 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_logits(cls, logits: torch.Tensor | np.ndarray, vocab_hash: str) -> "LogitMatrix":
        values = torch.as_tensor(logits, dtype=torch.float64)
        return cls(torch.softmax(values, dim=-1).detach().cpu().numpy(), vocab_hash)

    @property
    def length(self) -> int:
        return int(self.probs.shape[0])

    @property
    def vocab_size(self) -> int:
        return int(self.probs.shape[1])

    def row(self, position: int) -> np.ndarray:
        """Row at ``position``; positions past the canvas use the last row."""
        return self.probs[min(position, self.length - 1)]


@dataclass
class SampleResult:
    x0: torch.Tensor
    logits: LogitMatrix
    trace: list[dict[str, object]] = field(default_factory=list)


def greedy_decode(logits: LogitMatrix) -> TokenSequence:
    """Row-wise argmax; ties resolve to the lowest token index."""
    return [int(i) for i in np.argmax(logits.probs, axis=1)]


def one_hot_logits(expr: Expression, vocab: Vocabulary, canvas_length: int) -> LogitMatrix:
    """Logit matrix putting all mass on the padded prefix encoding of ``expr``."""
    ids = encode_expression(expr, vocab, canvas_length)
    probs = np.zeros((canvas_length, vocab.size))
    probs[np.arange(canvas_length), ids] = 1.0
    return LogitMatrix(probs, vocab.hash)


def point_condition(
    loaded: LoadedModel, points: Optional[PointSet]
) -> tuple[Optional[torch.Tensor], Optional[torch.Tensor]]:
    """Encoded points for one sample, or ``(None, None)`` for unconditional use."""
    if points is None or not loaded.config.model.conditional:
        return None, None
    data = loaded.config.data
    tokens = tokenize_points(points.Z, points.y, data.max_dims, data.mantissa_digits)
    device = loaded.model.embedding.weight.device
    with torch.no_grad():
        condition = loaded.model.encode_points(torch.as_tensor(tokens, device=device)[None])
    return condition, None


@torch.no_grad()
def sample_x0(
    loaded: LoadedModel,
    condition: Optional[torch.Tensor],
    seed: int,
    clamp_each_step: bool = False,
    steps: Optional[int] = None,
    trace_steps: Sequence[int] = (),
    condition_mask: Optional[torch.Tensor] = None,
) -> SampleResult:
    """Run the reverse chain from x_T ~ N(0, I) drawn with ``seed``.

    ``steps`` respaces the schedule to fewer inference steps. For every
    schedule index in ``trace_steps`` the greedy decode of that step's x0
    estimate is recorded.
    """
    model = loaded.model
    schedule = loaded.schedule.respaced(steps) if steps else loaded.schedule
    device = model.embedding.weight.device
    generator = torch.Generator(device=device).manual_seed(seed)
    x = torch.randn(
        (1, model.canvas_length, model.d_embed), generator=generator, device=device
    )
    trace: list[dict[str, object]] = []
    wanted = set(trace_steps)
    for t in range(schedule.T, 0, -1):
        x, x0_hat = reverse_step(
            model, x, t, schedule, condition, condition_mask, generator, clamp=clamp_each_step
        )
        if t in wanted:
            probs = LogitMatrix.from_logits(round_logits(x0_hat[0], model.rounding_weight), loaded.vocab.hash)
            ids = greedy_decode(probs)
            trace.append(
                {
                    "step": t,
                    "tokens": loaded.vocab.to_tokens(loaded.vocab.strip_padding(ids)),
                    "valid": is_valid_prefix(ids, loaded.vocab),
                }
            )
    logits = LogitMatrix.from_logits(round_logits(x[0], model.rounding_weight), loaded.vocab.hash)
    return SampleResult(x0=x[0], logits=logits, trace=trace)


def sample_sequences(
    loaded: LoadedModel,
    n_samples: int,
    seed: int = 0,
    condition: Optional[torch.Tensor] = None,
    clamp_each_step: bool = False,
    steps: Optional[int] = None,
) -> list[TokenSequence]:
    """Greedy decodes of ``n_samples`` chains seeded ``seed, seed + 1, ...``."""
    return [
        greedy_decode(sample_x0(loaded, condition, seed + i, clamp_each_step, steps).logits)
        for i in range(n_samples)
    ]


def trace_denoising(
    loaded: LoadedModel,
    seed: int,
    trace_steps: Sequence[int],
    condition: Optional[torch.Tensor] = None,
    clamp_each_step: bool = False,
) -> list[dict[str, object]]:
    """Greedy decode of the x0 estimate at the requested reverse steps."""
    return sample_x0(loaded, condition, seed, clamp_each_step, trace_steps=trace_steps).trace


def valid_rate_by_steps(
    loaded: LoadedModel,
    step_counts: Sequence[int],
    n_samples: int,
    seed: int = 0,
    condition: Optional[torch.Tensor] = None,
) -> dict[int, float]:
    """Grammar valid rate of greedy samples for each inference-step count."""
    rates = {}
    for steps in step_counts:
        sequences = sample_sequences(loaded, n_samples, seed, condition, steps=steps)
        rates[int(steps)] = sum(is_valid_prefix(s, loaded.vocab) for s in sequences) / n_samples
        logger.info(f"Valid rate with {steps} inference steps: {rates[int(steps)]:.3f}")
    return rates
