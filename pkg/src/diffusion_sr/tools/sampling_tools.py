"""
Unconditional sampling tool: decoded equations plus validity and diversity metrics.
"""

import json
import logging
from typing import Any, Dict, Optional, Sequence

from ..bench.metrics import complexity_entropy, self_bleu, valid_rate
from ..config.run_config import RunConfig
from ..decoding.sampling import sample_sequences, trace_denoising, valid_rate_by_steps
from ..diffusion.checkpoint import build_untrained
from ..errors import PrefixParseError
from ..symbolic.expression import Expression, to_infix
from ..symbolic.tokenizer import decode_expression
from .common import failure, optional_model, output_dir_for, success

logger = logging.getLogger(__name__)


def cmd_sample(
    config: RunConfig,
    checkpoint: Optional[str] = None,
    n_samples: Optional[int] = None,
    trace_steps: Optional[Sequence[int]] = None,
    step_counts: Optional[Sequence[int]] = None,
) -> Dict[str, Any]:
    """
    Samples equations unconditionally and scores them.

    Without a checkpoint a randomly initialised model is used, which still
    exercises the whole pipeline.

    Args:
        config: Run configuration
        checkpoint: Checkpoint path; defaults to ``checkpoint_path``
        n_samples: Number of chains; defaults to ``decode.n_samples``
        trace_steps: Reverse steps at which to record the x0 estimate
        step_counts: Inference-step counts for a valid-rate sweep

    Returns:
        Dict with status, equations and metrics or error message
    """
    try:
        loaded = optional_model(config, checkpoint)
        untrained = loaded is None
        if loaded is None:
            logger.warning("No checkpoint given; sampling from an untrained model")
            loaded = build_untrained(config, seed=config.train.seed)
        vocab = loaded.vocab
        n = n_samples or config.decode.n_samples
        seed = config.decode.seed

        sequences = sample_sequences(loaded, n, seed, clamp_each_step=config.decode.clamp_each_step)
        equations = []
        parsed: list[Expression] = []
        for ids in sequences:
            tokens = vocab.to_tokens(vocab.strip_padding(ids))
            try:
                expr = decode_expression(ids, vocab)
            except PrefixParseError:
                equations.append({"prefix": tokens, "infix": None, "valid": False})
                continue
            parsed.append(expr)
            equations.append({"prefix": tokens, "infix": to_infix(expr), "valid": True})

        metrics = {
            "valid_rate": valid_rate(sequences, vocab),
            "self_bleu": self_bleu(sequences, vocab) if n >= 2 else None,
            "complexity_entropy": complexity_entropy(parsed) if parsed else None,
        }
        data: Dict[str, Any] = {"metrics": metrics, "equations": equations}
        steps = list(trace_steps or config.decode.trace_steps)
        if steps:
            data["trace"] = trace_denoising(loaded, seed, steps, clamp_each_step=config.decode.clamp_each_step)
        if step_counts:
            data["valid_rate_by_steps"] = valid_rate_by_steps(loaded, step_counts, n, seed)

        out = output_dir_for(config, "sample")
        out.mkdir(parents=True, exist_ok=True)
        report = out / "sample_report.json"
        report.write_text(
            json.dumps(
                {"schema_version": config.schema_version, "config": config.model_dump(mode="json"), **data},
                indent=2,
            )
        )
        return success(
            "cmd_sample",
            data,
            report=str(report),
            untrained=untrained,
            vocab_hash=vocab.hash,
        )
    except Exception as e:
        return failure("cmd_sample", e, "sample equations")
