"""
Noise schedules.

Tables are indexed by diffusion step ``t`` in ``0..T``: index 0 holds the
clean state (``alpha_bar[0] = 1``, ``beta[0] = 0``).
"""

from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
import torch

MAX_BETA = 0.999


@dataclass(frozen=True)
class NoiseSchedule:
    """beta, alpha and cumulative alpha tables for T steps.

    ``model_steps[i]`` is the timestep fed to the denoiser at schedule index
    ``i``; it differs from ``i`` only for respaced schedules.
    """

    T: int
    betas: np.ndarray
    offset: float = 1e-4
    kind: str = "sqrt"
    model_steps: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))

    def __post_init__(self) -> None:
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.shape != (self.T + 1,):
            raise ValueError(f"Expected {self.T + 1} beta entries, got {betas.shape}")
        object.__setattr__(self, "betas", betas)
        if self.model_steps.size == 0:
            object.__setattr__(self, "model_steps", np.arange(self.T + 1, dtype=np.int64))

    @property
    def alphas(self) -> np.ndarray:
        return 1.0 - self.betas

    @property
    def alpha_bars(self) -> np.ndarray:
        return np.cumprod(self.alphas)

    @property
    def sigma0(self) -> float:
        """Embedding jitter scale, tied to the first noise level."""
        return float(np.sqrt(self.betas[1]))

    def posterior_coefficients(self, t: int) -> tuple[float, float, float]:
        """Coefficients of q(x_{t-1} | x_t, x_0): (on x0, on x_t, variance)."""
        ab = self.alpha_bars
        beta = self.betas[t]
        coef_x0 = np.sqrt(ab[t - 1]) * beta / (1.0 - ab[t])
        coef_xt = np.sqrt(self.alphas[t]) * (1.0 - ab[t - 1]) / (1.0 - ab[t])
        variance = (1.0 - ab[t - 1]) / (1.0 - ab[t]) * beta
        return float(coef_x0), float(coef_xt), float(variance)

    def table(self, name: str, device: torch.device | str = "cpu", dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """One of ``betas``, ``alphas``, ``alpha_bars`` as a tensor."""
        return torch.as_tensor(getattr(self, name), dtype=dtype, device=device)

    def respaced(self, steps: int) -> "NoiseSchedule":
        """Schedule over ``steps`` evenly spaced timesteps of this one.

        Cumulative alphas are kept at the retained timesteps, so q(x_t | x_0)
        is unchanged there.
        """
        if steps >= self.T:
            return self
        if steps < 1:
            raise ValueError("A respaced schedule needs at least one step")
        kept = np.unique(np.round(np.linspace(1, self.T, steps)).astype(np.int64))
        ab = self.alpha_bars
        kept_ab = np.concatenate([[1.0], ab[kept]])
        betas = np.concatenate([[0.0], 1.0 - kept_ab[1:] / kept_ab[:-1]])
        return NoiseSchedule(
            T=len(kept),
            betas=np.clip(betas, 0.0, MAX_BETA),
            offset=self.offset,
            kind=self.kind,
            model_steps=np.concatenate([[0], kept]),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "T": self.T,
            "kind": self.kind,
            "offset": self.offset,
            "betas": self.betas.tolist(),
            "model_steps": self.model_steps.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "NoiseSchedule":
        return cls(
            T=int(payload["T"]),
            betas=np.asarray(payload["betas"], dtype=np.float64),
            offset=float(payload["offset"]),
            kind=str(payload["kind"]),
            model_steps=np.asarray(payload["model_steps"], dtype=np.int64),
        )


def make_schedule(T: int, kind: Literal["sqrt"] = "sqrt", offset: float = 1e-4) -> NoiseSchedule:
    """Square-root schedule: alpha_bar(u) = 1 - sqrt(u + offset) for u = t / T.

    ``beta_t = 1 - alpha_bar(t/T) / alpha_bar((t-1)/T)`` clipped to
    ``(0, 0.999]``; cumulative alphas are recomputed from the clipped betas.
    """
    if T < 2:
        raise ValueError(f"A schedule needs T >= 2, got {T}")
    if kind != "sqrt":
        raise ValueError(f"Unknown schedule kind {kind!r}")

    def alpha_bar(u: np.ndarray) -> np.ndarray:
        return 1.0 - np.sqrt(u + offset)

    t = np.arange(1, T + 1, dtype=np.float64)
    ratio = alpha_bar(t / T) / alpha_bar((t - 1) / T)
    betas = np.clip(1.0 - ratio, np.finfo(np.float64).tiny, MAX_BETA)
    # alpha_bar(1) < 0 for any positive offset; the last ratio is not meaningful
    betas = np.where(ratio <= 0, MAX_BETA, betas)
    return NoiseSchedule(T=T, betas=np.concatenate([[0.0], betas]), offset=offset, kind=kind)
