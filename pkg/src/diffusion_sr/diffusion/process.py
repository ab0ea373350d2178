"""
Forward corruption, reverse transitions, rounding and the training loss.
"""

from dataclasses import dataclass
from typing import Optional

import torch
import torch.nn.functional as F

from .networks import Denoiser
from .schedule import NoiseSchedule


@dataclass
class LossTerms:
    total: torch.Tensor
    x0_mse: torch.Tensor
    embedding_mse: torch.Tensor
    rounding_nll: torch.Tensor

    def as_floats(self) -> dict[str, float]:
        return {
            "loss": float(self.total.detach()),
            "term1": float(self.x0_mse.detach()),
            "term2": float(self.embedding_mse.detach()),
            "term3": float(self.rounding_nll.detach()),
        }


def embed_sequence(
    tokens: torch.Tensor,
    embedding: torch.Tensor,
    sigma0: float,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    """x0 ~ N(E[w], sigma0^2 I) for padded token ids ``tokens`` (B x L)."""
    mean = F.embedding(tokens, embedding)
    if sigma0 == 0:
        return mean
    noise = torch.randn(mean.shape, generator=generator, dtype=mean.dtype, device=mean.device)
    return mean + sigma0 * noise


def _per_sample(values: torch.Tensor, t: torch.Tensor | int, like: torch.Tensor) -> torch.Tensor:
    if isinstance(t, int):
        return torch.full((like.shape[0], 1, 1), float(values[t]), dtype=like.dtype, device=like.device)
    return values.to(like.device, like.dtype)[t].view(-1, 1, 1)


def q_sample(
    x0: torch.Tensor, t: torch.Tensor | int, schedule: NoiseSchedule, noise: torch.Tensor
) -> torch.Tensor:
    """x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise."""
    alpha_bars = schedule.table("alpha_bars", dtype=torch.float64)
    ab = _per_sample(alpha_bars, t, x0)
    return torch.sqrt(ab) * x0 + torch.sqrt(1.0 - ab) * noise


def predict_x0(
    model: Denoiser,
    x_t: torch.Tensor,
    t: torch.Tensor | int,
    schedule: NoiseSchedule,
    condition: Optional[torch.Tensor] = None,
    condition_mask: Optional[torch.Tensor] = None,
) -> torch.Tensor:
    """Denoiser estimate of x0 at schedule index ``t``."""
    if isinstance(t, int):
        t = torch.full((x_t.shape[0],), t, dtype=torch.long, device=x_t.device)
    model_t = torch.as_tensor(schedule.model_steps, device=x_t.device)[t]
    out = model(x_t, model_t, condition, condition_mask)
    assert isinstance(out, torch.Tensor)
    return out


def clamp_to_embeddings(x0_hat: torch.Tensor, embedding: torch.Tensor) -> torch.Tensor:
    """Snap each row to the embedding of its most likely token."""
    ids = round_logits(x0_hat, embedding).argmax(dim=-1)
    return F.embedding(ids, embedding)


def reverse_step(
    model: Denoiser,
    x_t: torch.Tensor,
    t: int,
    schedule: NoiseSchedule,
    condition: Optional[torch.Tensor] = None,
    condition_mask: Optional[torch.Tensor] = None,
    generator: Optional[torch.Generator] = None,
    clamp: bool = False,
) -> tuple[torch.Tensor, torch.Tensor]:
    """Sample x_{t-1} from the posterior given the model's x0 estimate.

    Returns ``(x_{t-1}, x0_hat)``. At ``t == 1`` the posterior mean is
    returned without noise.
    """
    x0_hat = predict_x0(model, x_t, t, schedule, condition, condition_mask)
    if clamp:
        x0_hat = clamp_to_embeddings(x0_hat, model.rounding_weight)
    coef_x0, coef_xt, variance = schedule.posterior_coefficients(t)
    mean = coef_x0 * x0_hat + coef_xt * x_t
    if t == 1:
        return mean, x0_hat
    noise = torch.randn(x_t.shape, generator=generator, dtype=x_t.dtype, device=x_t.device)
    return mean + variance**0.5 * noise, x0_hat


def round_logits(x0_hat: torch.Tensor, embedding: torch.Tensor) -> torch.Tensor:
    """Vocabulary logits ``x0_hat @ E^T``."""
    return x0_hat @ embedding.T


def build_condition(
    model: Denoiser,
    point_tokens: Optional[torch.Tensor],
    point_mask: Optional[torch.Tensor],
    null_rows: Optional[torch.Tensor] = None,
) -> tuple[torch.Tensor, Optional[torch.Tensor]]:
    """Encode points, substituting the learned null condition where asked.

    ``null_rows`` (B, bool) selects samples that see only the null
    condition. Without points every sample is unconditional.
    """
    if point_tokens is None:
        return model.null(1), None
    condition = model.encode_points(point_tokens, point_mask)
    B, N, _ = condition.shape
    mask = point_mask if point_mask is not None else torch.zeros(B, N, dtype=torch.bool, device=condition.device)
    if null_rows is None or not bool(null_rows.any()):
        return condition, mask
    null = model.null(B).to(condition.dtype)
    first = torch.zeros(B, N, 1, dtype=torch.bool, device=condition.device)
    first[:, 0] = True
    swap = null_rows[:, None, None] & first
    condition = torch.where(swap, null.expand(B, N, -1), condition)
    hide_rest = null_rows[:, None] & ~first.squeeze(-1)
    mask = (mask & ~null_rows[:, None]) | hide_rest
    return condition, mask


def diffusion_loss(
    model: Denoiser,
    tokens: torch.Tensor,
    schedule: NoiseSchedule,
    condition: Optional[torch.Tensor] = None,
    condition_mask: Optional[torch.Tensor] = None,
    generator: Optional[torch.Generator] = None,
) -> LossTerms:
    """Embedding-diffusion objective, averaged over the batch.

    ``term1`` is the x0 regression error at ``t ~ U{2..T}``, ``term2`` the
    error of the t = 1 estimate against the clean embeddings and ``term3`` the
    rounding cross-entropy of x0. Squared errors are means over the L x d
    elements of each sample.
    """
    B = tokens.shape[0]
    device = tokens.device
    embedding = model.embedding.weight
    mean = F.embedding(tokens, embedding)
    x0 = embed_sequence(tokens, embedding, schedule.sigma0, generator)

    t = torch.randint(2, schedule.T + 1, (B,), generator=generator, device=device)
    noise = torch.randn(x0.shape, generator=generator, dtype=x0.dtype, device=device)
    x_t = q_sample(x0, t, schedule, noise)
    x0_hat = predict_x0(model, x_t, t, schedule, condition, condition_mask)
    term1 = ((x0 - x0_hat) ** 2).mean(dim=(1, 2))

    noise1 = torch.randn(x0.shape, generator=generator, dtype=x0.dtype, device=device)
    x_1 = q_sample(x0, 1, schedule, noise1)
    x0_hat_1 = predict_x0(model, x_1, 1, schedule, condition, condition_mask)
    term2 = ((mean - x0_hat_1) ** 2).mean(dim=(1, 2))

    logits = round_logits(x0, embedding)
    term3 = F.cross_entropy(
        logits.reshape(-1, logits.shape[-1]), tokens.reshape(-1), reduction="none"
    ).view(B, -1).mean(dim=1)

    return LossTerms(
        total=(term1 + term2 + term3).mean(),
        x0_mse=term1.mean(),
        embedding_mse=term2.mean(),
        rounding_nll=term3.mean(),
    )
