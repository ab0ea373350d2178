"""Command tools for diffusion-sr; each returns a success or error envelope."""

from .bench_tools import cmd_ablation, cmd_bench
from .data_tools import cmd_gen_data, cmd_list_problems
from .sampling_tools import cmd_sample
from .solve_tools import cmd_solve
from .training_tools import cmd_train

__all__ = [
    "cmd_ablation",
    "cmd_bench",
    "cmd_gen_data",
    "cmd_list_problems",
    "cmd_sample",
    "cmd_solve",
    "cmd_train",
]
