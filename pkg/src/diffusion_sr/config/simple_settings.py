"""
Process-level configuration for diffusion-sr.
Using environment variables directly; run parameters live in RunConfig.
"""

import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


class Settings:
    """Simple configuration management using environment variables."""

    def __init__(self) -> None:
        self.log_level = os.getenv("LOG_LEVEL", "INFO")
        self.output_dir = os.getenv("DIFFUSION_SR_OUTPUT_DIR", "runs")
        self.workers_raw = os.getenv("DIFFUSION_SR_WORKERS", "")
        self.device = os.getenv("DIFFUSION_SR_DEVICE", "cpu")
        self.version = "1.0.0"

    @property
    def workers(self) -> int:
        """Worker-pool size; defaults to the available cores."""
        if self.workers_raw.strip():
            return int(self.workers_raw)
        return os.cpu_count() or 1

    def validate(self) -> None:
        """Validate every setting, reporting all problems at once."""
        invalid = []

        if self.log_level.upper() not in _LOG_LEVELS:
            invalid.append(f"LOG_LEVEL={self.log_level!r} (expected one of {', '.join(_LOG_LEVELS)})")

        if self.workers_raw.strip():
            try:
                if int(self.workers_raw) < 1:
                    invalid.append(f"DIFFUSION_SR_WORKERS={self.workers_raw!r} (must be >= 1)")
            except ValueError:
                invalid.append(f"DIFFUSION_SR_WORKERS={self.workers_raw!r} (not an integer)")

        if not (self.device == "cpu" or self.device.startswith("cuda") or self.device == "mps"):
            invalid.append(f"DIFFUSION_SR_DEVICE={self.device!r} (expected cpu, cuda[:n] or mps)")

        if not self.output_dir.strip():
            invalid.append("DIFFUSION_SR_OUTPUT_DIR is empty")

        if invalid:
            raise ValueError(
                f"Invalid environment settings: {'; '.join(invalid)}. "
                "Please update your .env file."
            )


# Global settings instance
settings = Settings()
