"""diffusion-sr: symbolic regression with a diffusion language model and guided GP."""

from .config.run_config import RunConfig, load_run_config
from .config.simple_settings import settings
from .errors import DiffusionSRError

__version__ = settings.version

__all__ = ["DiffusionSRError", "RunConfig", "__version__", "load_run_config", "settings"]
