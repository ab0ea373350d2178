"""
Model training tool.
"""

import logging
from typing import Any, Dict, Optional

from ..config.run_config import RunConfig
from ..data.corpus import load_corpus
from ..diffusion.trainer import train
from ..errors import UsageError
from ..models.model_manager import ModelManager
from .common import device_for, failure, output_dir_for, success

logger = logging.getLogger(__name__)


def cmd_train(
    config: RunConfig, corpus: Optional[str] = None, limit: Optional[int] = None
) -> Dict[str, Any]:
    """
    Trains the denoiser on a corpus and writes a checkpoint.

    Args:
        config: Run configuration (model, train and data sections)
        corpus: Corpus path; defaults to ``corpus_path``
        limit: Use only the first ``limit`` records

    Returns:
        Dict with status and checkpoint/log paths or error message
    """
    try:
        path = corpus or config.corpus_path
        if path is None:
            raise UsageError("Training needs a corpus (--corpus or corpus_path)")
        records = load_corpus(path, limit)
        output_dir = output_dir_for(config, "train")
        result = train(records, config, output_dir=output_dir, device=device_for(config))
        if result.checkpoint_path is not None:
            ModelManager.put_model(result.checkpoint_path, result.loaded(config))

        final = result.history[-1]
        return success(
            "cmd_train",
            {
                "checkpoint": str(result.checkpoint_path),
                "training_log": str(result.log_path),
                "records": len(records),
                "steps": config.train.steps,
                "final_loss": final["loss"],
                "final_terms": {k: final[k] for k in ("term1", "term2", "term3")},
                "vocab_hash": result.vocab.hash,
            },
            schema_version=config.schema_version,
        )
    except Exception as e:
        return failure("cmd_train", e, "train model")
