"""
Denoiser network and point-set encoder.

The denoiser maps a noisy canvas of token embeddings ``x_t`` (B x L x d) to an
estimate of ``x_0``. Each layer runs self-attention over the canvas,
cross-attention from the canvas to the encoded points, and a feed-forward
block. The rounding head shares its weight with the token embedding.
"""

import math
from typing import Optional

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..config.run_config import ModelConfig
from ..errors import DataError
from ..symbolic.tokenizer import EXPONENT_MAX, EXPONENT_MIN, encode_constant_array

LAYER_NORM_EPS = 1e-12


# Numeric point tokens


def numeric_vocab_size(mantissa_digits: int) -> int:
    """Padding, two signs, the mantissas and the exponents."""
    return 3 + 10**mantissa_digits + (EXPONENT_MAX - EXPONENT_MIN + 1)


def tokenize_points(
    Z: np.ndarray, y: np.ndarray, max_dims: int = 3, mantissa_digits: int = 4
) -> np.ndarray:
    """Numeric tokens of a point set, shape ``N x 3(max_dims + 1)``.

    Each point is ``[y, x_1, ..., x_D]`` with every value written as
    ``(sign, mantissa, exponent)``; absent dimensions use the padding token.
    """
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    if Z.shape[1] > max_dims:
        raise DataError(f"Points have {Z.shape[1]} dimensions; the encoder supports {max_dims}")
    values = np.concatenate([y, Z], axis=1)
    if not np.isfinite(values).all():
        raise DataError("Point encoder inputs must be finite")
    negative, mantissa, exponent = encode_constant_array(values, mantissa_digits)
    sign_ids = 1 + negative
    mantissa_ids = 3 + mantissa
    exponent_ids = 3 + 10**mantissa_digits + (exponent - EXPONENT_MIN)
    triples = np.stack([sign_ids, mantissa_ids, exponent_ids], axis=-1)
    n_points = values.shape[0]
    out = np.zeros((n_points, max_dims + 1, 3), dtype=np.int64)
    out[:, : values.shape[1], :] = triples
    return out.reshape(n_points, 3 * (max_dims + 1))


class PointEncoder(nn.Module):
    """Permutation-equivariant encoder: one embedding per input point.

    No positional information enters, so permuting the points permutes the
    output rows identically.
    """

    def __init__(
        self,
        d_model: int,
        n_layers: int,
        n_heads: int,
        numeric_embed: int = 16,
        max_dims: int = 3,
        mantissa_digits: int = 4,
        ffn_multiplier: int = 4,
        dropout: float = 0.0,
    ) -> None:
        super().__init__()
        self.max_dims = max_dims
        self.mantissa_digits = mantissa_digits
        self.token_embedding = nn.Embedding(
            numeric_vocab_size(mantissa_digits), numeric_embed, padding_idx=0
        )
        n_tokens = 3 * (max_dims + 1)
        self.lift = nn.Sequential(
            nn.Linear(n_tokens * numeric_embed, d_model),
            nn.GELU(),
            nn.Linear(d_model, d_model),
        )
        layer = nn.TransformerEncoderLayer(
            d_model,
            n_heads,
            ffn_multiplier * d_model,
            dropout,
            activation="gelu",
            batch_first=True,
            norm_first=True,
            layer_norm_eps=LAYER_NORM_EPS,
        )
        self.encoder = nn.TransformerEncoder(layer, n_layers, enable_nested_tensor=False)

    def forward(
        self, tokens: torch.Tensor, padding_mask: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        """tokens: B x N x 3(D+1) ids; padding_mask: B x N, True marks padding."""
        lifted = self.lift(self.token_embedding(tokens).flatten(2))
        return self.encoder(lifted, src_key_padding_mask=padding_mask)


# Time embeddings


class SinusoidalTimeEmbedding(nn.Module):
    def __init__(self, d_model: int) -> None:
        super().__init__()
        self.d_model = d_model
        self.mlp = nn.Sequential(
            nn.Linear(d_model, 4 * d_model), nn.SiLU(), nn.Linear(4 * d_model, d_model)
        )

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        half = self.d_model // 2
        freqs = torch.exp(
            -math.log(10000.0) * torch.arange(half, device=t.device, dtype=torch.float32) / half
        )
        args = t.float()[:, None] * freqs[None, :]
        emb = torch.cat([torch.sin(args), torch.cos(args)], dim=-1)
        if self.d_model % 2:
            emb = F.pad(emb, (0, 1))
        return self.mlp(emb.to(self.mlp[0].weight.dtype))


class LearnedTimeEmbedding(nn.Module):
    def __init__(self, d_model: int, steps: int) -> None:
        super().__init__()
        self.table = nn.Embedding(steps + 1, d_model)

    def forward(self, t: torch.Tensor) -> torch.Tensor:
        return self.table(t.long())


# Denoiser


class CrossAttention(nn.Module):
    """Multi-head attention from canvas queries to point keys/values.

    Keys and values come from a per-layer MLP applied to the condition.
    Returns the attention weights alongside the output.
    """

    def __init__(self, d_model: int, n_heads: int, dropout: float = 0.0) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.d_head = d_model // n_heads
        self.condition_mlp = nn.Sequential(
            nn.Linear(d_model, d_model), nn.GELU(), nn.Linear(d_model, d_model)
        )
        self.w_q = nn.Linear(d_model, d_model)
        self.w_k = nn.Linear(d_model, d_model)
        self.w_v = nn.Linear(d_model, d_model)
        self.w_o = nn.Linear(d_model, d_model)
        self.dropout = nn.Dropout(dropout)

    def forward(
        self,
        x: torch.Tensor,
        condition: torch.Tensor,
        condition_mask: Optional[torch.Tensor] = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        B, L, D = x.shape
        N = condition.shape[1]
        c = self.condition_mlp(condition)
        q = self.w_q(x).view(B, L, self.n_heads, self.d_head).transpose(1, 2)
        k = self.w_k(c).view(B, N, self.n_heads, self.d_head).transpose(1, 2)
        v = self.w_v(c).view(B, N, self.n_heads, self.d_head).transpose(1, 2)
        scores = q @ k.transpose(-2, -1) / math.sqrt(self.d_head)
        if condition_mask is not None:
            scores = scores.masked_fill(condition_mask[:, None, None, :], float("-inf"))
        attention = torch.softmax(scores, dim=-1)
        out = (self.dropout(attention) @ v).transpose(1, 2).reshape(B, L, D)
        return self.w_o(out), attention


class DenoiserLayer(nn.Module):
    def __init__(self, d_model: int, n_heads: int, ffn_multiplier: int, dropout: float) -> None:
        super().__init__()
        self.norm_self = nn.LayerNorm(d_model, eps=LAYER_NORM_EPS)
        self.self_attention = nn.MultiheadAttention(
            d_model, n_heads, dropout=dropout, batch_first=True
        )
        self.norm_cross = nn.LayerNorm(d_model, eps=LAYER_NORM_EPS)
        self.cross_attention = CrossAttention(d_model, n_heads, dropout)
        self.norm_ffn = nn.LayerNorm(d_model, eps=LAYER_NORM_EPS)
        self.ffn = nn.Sequential(
            nn.Linear(d_model, ffn_multiplier * d_model),
            nn.GELU(),
            nn.Linear(ffn_multiplier * d_model, d_model),
            nn.Dropout(dropout),
        )

    def forward(
        self,
        h: torch.Tensor,
        condition: torch.Tensor,
        condition_mask: Optional[torch.Tensor] = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        normed = self.norm_self(h)
        attended, _ = self.self_attention(normed, normed, normed, need_weights=False)
        h = h + attended
        crossed, attention = self.cross_attention(self.norm_cross(h), condition, condition_mask)
        h = h + crossed
        h = h + self.ffn(self.norm_ffn(h))
        return h, attention


class Denoiser(nn.Module):
    """x_0 estimator f(x_t, t; points) with tied embedding and rounding."""

    def __init__(
        self,
        vocab_size: int,
        canvas_length: int,
        config: ModelConfig,
        max_dims: int = 3,
        mantissa_digits: int = 4,
    ) -> None:
        super().__init__()
        self.vocab_size = vocab_size
        self.canvas_length = canvas_length
        self.d_embed = config.d_embed
        d_model = config.d_model
        self.embedding = nn.Embedding(vocab_size, config.d_embed)
        self.input_proj = nn.Linear(config.d_embed, d_model)
        self.position = nn.Embedding(canvas_length, d_model)
        if config.time_embedding == "learned":
            self.time: nn.Module = LearnedTimeEmbedding(d_model, config.diffusion_steps)
        else:
            self.time = SinusoidalTimeEmbedding(d_model)
        self.point_encoder = PointEncoder(
            d_model,
            config.encoder_layers,
            config.encoder_heads,
            numeric_embed=config.numeric_embed,
            max_dims=max_dims,
            mantissa_digits=mantissa_digits,
            ffn_multiplier=config.ffn_multiplier,
            dropout=config.dropout,
        )
        self.null_condition = nn.Parameter(torch.randn(1, 1, d_model) * 0.02)
        self.layers = nn.ModuleList(
            DenoiserLayer(d_model, config.n_heads, config.ffn_multiplier, config.dropout)
            for _ in range(config.n_layers)
        )
        self.norm = nn.LayerNorm(d_model, eps=LAYER_NORM_EPS)
        self.output_proj = nn.Linear(d_model, config.d_embed)

    @property
    def rounding_weight(self) -> torch.Tensor:
        """Projection onto the vocabulary; the same storage as the embedding."""
        return self.embedding.weight

    def encode_points(
        self, tokens: torch.Tensor, padding_mask: Optional[torch.Tensor] = None
    ) -> torch.Tensor:
        return self.point_encoder(tokens, padding_mask)

    def null(self, batch: int) -> torch.Tensor:
        return self.null_condition.expand(batch, 1, -1)

    def forward(
        self,
        x_t: torch.Tensor,
        t: torch.Tensor,
        condition: Optional[torch.Tensor] = None,
        condition_mask: Optional[torch.Tensor] = None,
        return_attention: bool = False,
    ) -> torch.Tensor | tuple[torch.Tensor, list[torch.Tensor]]:
        B, L, _ = x_t.shape
        if L != self.canvas_length:
            raise ValueError(f"Canvas has {L} rows, model expects {self.canvas_length}")
        if condition is None:
            condition = self.null(B)
            condition_mask = None
        elif condition.shape[0] != B:
            condition = condition.expand(B, -1, -1)
            if condition_mask is not None:
                condition_mask = condition_mask.expand(B, -1)
        positions = torch.arange(L, device=x_t.device)
        h = self.input_proj(x_t) + self.time(t)[:, None, :] + self.position(positions)[None]
        attentions = []
        for layer in self.layers:
            h, attention = layer(h, condition, condition_mask)
            attentions.append(attention)
        x0_hat = self.output_proj(self.norm(h))
        if return_attention:
            return x0_hat, attentions
        return x0_hat
