"""
Shared plumbing for the command tools: response envelopes, output
locations, worker counts and model loading.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..config.run_config import RunConfig
from ..config.simple_settings import settings
from ..diffusion.checkpoint import LoadedModel
from ..errors import UsageError, exit_code_for
from ..models.model_manager import ModelManager

logger = logging.getLogger(__name__)


def success(operation: str, data: Any, **metadata: Any) -> Dict[str, Any]:
    return {
        "status": "success",
        "data": data,
        "metadata": {"operation": operation, **metadata},
    }


def failure(operation: str, error: BaseException, what: str) -> Dict[str, Any]:
    logger.error(f"Error in {operation}: {error}")
    return {
        "status": "error",
        "message": f"Failed to {what}: {str(error)}",
        "error_type": type(error).__name__,
        "exit_code": exit_code_for(error),
    }


def output_dir_for(config: RunConfig, command: str) -> Path:
    """``config.output_dir`` if set, else ``<DIFFUSION_SR_OUTPUT_DIR>/<command>``."""
    if config.output_dir:
        return Path(config.output_dir)
    return Path(settings.output_dir) / command


def workers_for(config: RunConfig) -> int:
    return config.workers if config.workers is not None else settings.workers


def device_for(config: RunConfig) -> str:
    return config.device or settings.device


def require_model(config: RunConfig, checkpoint: Optional[str] = None) -> LoadedModel:
    """Cached model from ``checkpoint`` or ``config.checkpoint_path``."""
    path = checkpoint or config.checkpoint_path
    if path is None:
        raise UsageError("This command needs a checkpoint (--checkpoint or checkpoint_path)")
    return ModelManager.get_model(path, device=device_for(config))


def optional_model(config: RunConfig, checkpoint: Optional[str] = None) -> Optional[LoadedModel]:
    if checkpoint is None and config.checkpoint_path is None:
        return None
    return require_model(config, checkpoint)
