"""Resources package for diffusion-sr."""

from .benchmark_resources import benchmark_table, get_benchmark_resource

__all__ = ["benchmark_table", "get_benchmark_resource"]
