"""
Command-line surface for diffusion-sr.
Central registration point for all subcommands; each prints one JSON
envelope on stdout and exits with the code of its error type.
"""

import argparse
import json
import logging
import sys
from typing import Any, Callable, Dict, NoReturn, Optional, Sequence

from .config.run_config import RunConfig, load_run_config
from .errors import UsageError, exit_code_for
from .tools import (
    cmd_ablation,
    cmd_bench,
    cmd_gen_data,
    cmd_list_problems,
    cmd_sample,
    cmd_solve,
    cmd_train,
)

logger = logging.getLogger(__name__)


def _int_list(raw: str) -> list[int]:
    try:
        return [int(part) for part in raw.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {raw!r}") from e


def _seeds(raw: str) -> list[int]:
    """``5`` means seeds 0..4; ``3,7,11`` lists them."""
    values = _int_list(raw)
    if len(values) == 1 and "," not in raw:
        if values[0] < 1:
            raise argparse.ArgumentTypeError("seed count must be positive")
        return list(range(values[0]))
    return values


class _Parser(argparse.ArgumentParser):
    """Bad flags are usage errors (exit 1)."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="diffusion-sr",
        description="Symbolic regression with a diffusion language model and guided GP",
    )
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="Override a config field, e.g. gp.generations=50 (repeatable)",
    )
    common.add_argument("--output-dir", help="Directory for this command's outputs")
    common.add_argument("--workers", type=int, help="Worker-pool size")

    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", parents=[common], help="Generate a synthetic corpus")
    gen.add_argument("--corpus", help="Corpus output path")

    train = sub.add_parser("train", parents=[common], help="Train the denoiser")
    train.add_argument("--corpus", help="Corpus path")
    train.add_argument("--limit", type=int, help="Use only the first N records")

    sample = sub.add_parser("sample", parents=[common], help="Sample equations unconditionally")
    sample.add_argument("--checkpoint")
    sample.add_argument("--n-samples", type=int)
    sample.add_argument("--trace-steps", type=_int_list, help="e.g. 2000,1500,1000,500,1")
    sample.add_argument("--step-counts", type=_int_list, help="Valid-rate sweep over inference steps")

    solve = sub.add_parser("solve", parents=[common], help="Find an equation for a points file")
    solve.add_argument("--points", required=True, help="CSV (x_1..x_D,y) or JSON points file")
    solve.add_argument("--solver", choices=["top_k", "guided_gp", "classic_gp"])
    solve.add_argument("--checkpoint")
    solve.add_argument("--oracle-expression", help="Guide GP with one-hot logits of this expression")

    bench = sub.add_parser("bench", parents=[common], help="Run a benchmark suite")
    bench.add_argument("--suite", help="nguyen, livermore, constant, jin or all")
    bench.add_argument("--solver", choices=["top_k", "guided_gp", "classic_gp"])
    bench.add_argument("--seeds", type=_seeds, help="Seed count (5) or list (0,3,9)")
    bench.add_argument("--checkpoint")
    bench.add_argument("--ablation", metavar="PROBLEM", help="Run the guidance ablation on PROBLEM instead")
    bench.add_argument("--threshold", type=float, default=0.99, help="Ablation R^2 threshold")

    problems = sub.add_parser("problems", help="List benchmark problems")
    problems.add_argument("--suite", default="all")
    return parser


def _config_from(args: argparse.Namespace) -> RunConfig:
    overrides = list(args.overrides)
    if args.output_dir:
        overrides.append(f"output_dir={json.dumps(args.output_dir)}")
    if args.workers is not None:
        overrides.append(f"workers={args.workers}")
    if getattr(args, "suite", None):
        overrides.append(f"bench.suite={json.dumps(args.suite)}")
    if getattr(args, "solver", None) and args.command == "bench":
        overrides.append(f"bench.solver={args.solver}")
    if getattr(args, "seeds", None):
        overrides.append(f"bench.seeds={json.dumps(args.seeds)}")
    return load_run_config(args.config, overrides)


def dispatch(args: argparse.Namespace) -> Dict[str, Any]:
    if args.command == "problems":
        return cmd_list_problems(args.suite)
    config = _config_from(args)
    commands: Dict[str, Callable[[], Dict[str, Any]]] = {
        "gen-data": lambda: cmd_gen_data(config, args.corpus),
        "train": lambda: cmd_train(config, args.corpus, args.limit),
        "sample": lambda: cmd_sample(
            config, args.checkpoint, args.n_samples, args.trace_steps, args.step_counts
        ),
        "solve": lambda: cmd_solve(
            config, args.points, args.solver, args.checkpoint, args.oracle_expression
        ),
        "bench": lambda: (
            cmd_ablation(config, args.ablation, args.checkpoint, args.threshold)
            if args.ablation
            else cmd_bench(config, args.checkpoint)
        ),
    }
    return commands[args.command]()


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        response = dispatch(args)
    except UsageError as e:
        logger.error(f"Invalid invocation: {e}")
        response = {
            "status": "error",
            "message": f"Failed to load configuration: {e}",
            "error_type": type(e).__name__,
            "exit_code": exit_code_for(e),
        }
    print(json.dumps(response, indent=2, default=str))
    if response["status"] == "success":
        return 0
    return response["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
