"""
Checkpoint cache.
Loaded models are shared by every command in the process, keyed by path.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..config.simple_settings import settings
from ..diffusion.checkpoint import LoadedModel, load_checkpoint

logger = logging.getLogger(__name__)


class ModelManager:
    """Centralized management of loaded checkpoints."""

    _models: Dict[tuple[str, bool, str], LoadedModel] = {}

    @classmethod
    def get_model(
        cls, path: str | Path, use_ema: bool = True, device: Optional[str] = None
    ) -> LoadedModel:
        """Get or load the checkpoint at ``path``."""
        device = device or settings.device
        key = (str(Path(path).resolve()), use_ema, device)
        if key not in cls._models:
            logger.info(f"Loading checkpoint {path} on {device}...")
            cls._models[key] = load_checkpoint(path, use_ema=use_ema, device=device)
        return cls._models[key]

    @classmethod
    def put_model(cls, path: str | Path, model: LoadedModel, use_ema: bool = True) -> None:
        """Register an in-memory model under ``path``."""
        device = str(model.model.embedding.weight.device)
        cls._models[(str(Path(path).resolve()), use_ema, device)] = model

    @classmethod
    def clear_all(cls) -> None:
        """Drop every cached model - ESSENTIAL for testing."""
        cls._models.clear()

    @classmethod
    def get_memory_usage(cls) -> Dict[str, Any]:
        """Get current cache statistics."""
        return {
            "models_count": len(cls._models),
            "parameters": sum(
                sum(p.numel() for p in m.model.parameters()) for m in cls._models.values()
            ),
            "paths": sorted({key[0] for key in cls._models}),
        }
