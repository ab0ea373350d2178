"""
Training loop for the denoiser.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
import pandas as pd
import torch

from ..config.run_config import RunConfig
from ..data.corpus import CorpusRecord
from ..errors import DataError, NaNLossError
from ..symbolic.tokenizer import Vocabulary, VocabMode
from .checkpoint import LoadedModel, build_model, save_checkpoint
from .networks import Denoiser, tokenize_points
from .process import build_condition, diffusion_loss
from .schedule import NoiseSchedule, make_schedule

logger = logging.getLogger(__name__)


@dataclass
class TrainingBatch:
    tokens: torch.Tensor
    point_tokens: torch.Tensor
    point_mask: torch.Tensor


@dataclass
class TrainResult:
    model: Denoiser
    ema_state: dict[str, torch.Tensor]
    schedule: NoiseSchedule
    vocab: Vocabulary
    history: list[dict[str, float]] = field(default_factory=list)
    checkpoint_path: Optional[Path] = None
    log_path: Optional[Path] = None

    def loaded(self, config: RunConfig, use_ema: bool = True) -> LoadedModel:
        """Inference view of the trained model."""
        model = build_model(config, self.vocab)
        model.load_state_dict(self.ema_state if use_ema else self.model.state_dict())
        return LoadedModel(model.eval(), self.vocab, self.schedule, config, self.checkpoint_path)


def collate(
    records: Sequence[CorpusRecord],
    vocab: Vocabulary,
    canvas_length: int,
    rng: np.random.Generator,
    max_points: int = 200,
    max_dims: int = 3,
    mantissa_digits: int = 4,
) -> TrainingBatch:
    """Pad token sequences to the canvas and point sets to the largest set.

    Point sets larger than ``max_points`` are subsampled without replacement.
    """
    use_full = vocab.mode == VocabMode.FULL
    token_rows = []
    point_rows = []
    for record in records:
        ids = vocab.to_ids(record.full if use_full else record.skeleton)
        token_rows.append(vocab.pad(ids, canvas_length))
        Z, y = record.points.Z, record.points.y
        if record.points.n_points > max_points:
            keep = np.sort(rng.choice(record.points.n_points, size=max_points, replace=False))
            Z, y = Z[keep], y[keep]
        point_rows.append(tokenize_points(Z, y, max_dims, mantissa_digits))
    n_max = max(p.shape[0] for p in point_rows)
    width = point_rows[0].shape[1]
    points = np.zeros((len(records), n_max, width), dtype=np.int64)
    mask = np.ones((len(records), n_max), dtype=bool)
    for i, rows in enumerate(point_rows):
        points[i, : rows.shape[0]] = rows
        mask[i, : rows.shape[0]] = False
    return TrainingBatch(
        tokens=torch.as_tensor(np.asarray(token_rows), dtype=torch.long),
        point_tokens=torch.from_numpy(points),
        point_mask=torch.from_numpy(mask),
    )


def update_ema(ema_state: dict[str, torch.Tensor], model: Denoiser, decay: float) -> None:
    """ema <- decay * ema + (1 - decay) * current, for every state entry."""
    with torch.no_grad():
        for name, value in model.state_dict().items():
            if value.dtype.is_floating_point:
                ema_state[name].mul_(decay).add_(value, alpha=1.0 - decay)
            else:
                ema_state[name].copy_(value)


def train(
    records: Sequence[CorpusRecord],
    config: RunConfig,
    output_dir: Optional[str | Path] = None,
    device: str = "cpu",
) -> TrainResult:
    """Train a denoiser on corpus records.

    Writes ``training_log.csv`` and ``checkpoint.pt`` under ``output_dir``
    when given. Raises NaNLossError on the first non-finite loss.
    """
    if not records:
        raise DataError("Cannot train on an empty corpus")
    tc = config.train
    vocab = config.data.vocabulary()
    canvas = config.canvas_length()
    schedule = make_schedule(
        config.model.diffusion_steps, config.model.schedule, config.model.schedule_offset
    )

    torch.manual_seed(tc.seed)
    generator = torch.Generator(device=device).manual_seed(tc.seed)
    rng = np.random.default_rng(tc.seed)
    model = build_model(config, vocab).to(device)
    model.train()
    optimizer = torch.optim.AdamW(
        model.parameters(), lr=tc.learning_rate, weight_decay=tc.weight_decay
    )
    ema_state = {k: v.detach().clone() for k, v in model.state_dict().items()}

    logger.info(
        f"Training {sum(p.numel() for p in model.parameters())} parameters on "
        f"{len(records)} records for {tc.steps} steps (mode={vocab.mode.value}, T={schedule.T})"
    )
    history: list[dict[str, float]] = []
    for step in range(1, tc.steps + 1):
        idx = rng.integers(0, len(records), size=min(tc.batch_size, len(records)))
        batch = collate(
            [records[i] for i in idx],
            vocab,
            canvas,
            rng,
            max_points=tc.max_points,
            max_dims=config.data.max_dims,
            mantissa_digits=config.data.mantissa_digits,
        )
        tokens = batch.tokens.to(device)
        if config.model.conditional:
            null_rows = torch.rand(tokens.shape[0], generator=generator, device=device) < tc.null_condition_rate
            condition, mask = build_condition(
                model, batch.point_tokens.to(device), batch.point_mask.to(device), null_rows
            )
        else:
            condition, mask = None, None
        terms = diffusion_loss(model, tokens, schedule, condition, mask, generator)
        values = terms.as_floats()
        if not math.isfinite(values["loss"]):
            raise NaNLossError(f"Non-finite loss at step {step}: {values}")

        optimizer.zero_grad(set_to_none=True)
        terms.total.backward()
        if tc.grad_clip is not None:
            torch.nn.utils.clip_grad_norm_(model.parameters(), tc.grad_clip)
        optimizer.step()
        update_ema(ema_state, model, tc.ema_decay)

        history.append({"step": float(step), **values})
        if step % tc.log_every == 0 or step == 1:
            logger.info(
                f"step {step}/{tc.steps} loss={values['loss']:.4f} "
                f"term1={values['term1']:.4f} term2={values['term2']:.4f} term3={values['term3']:.4f}"
            )

    model.eval()
    result = TrainResult(model, ema_state, schedule, vocab, history)
    if output_dir is not None:
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(history, columns=["step", "loss", "term1", "term2", "term3"])
        frame["step"] = frame["step"].astype(int)
        result.log_path = out / "training_log.csv"
        frame.to_csv(result.log_path, index=False)
        result.checkpoint_path = save_checkpoint(
            out / "checkpoint.pt",
            model,
            config,
            vocab,
            schedule,
            ema_state,
            extra={"final_loss": history[-1]["loss"], "steps": tc.steps},
        )
    return result
