"""
Benchmark and ablation tools.
"""

import json
import logging
from typing import Any, Dict, Optional

from ..bench.harness import run_ablation, run_benchmark
from ..config.run_config import RunConfig
from ..models.schemas import SolverKind
from .common import failure, optional_model, output_dir_for, success, workers_for

logger = logging.getLogger(__name__)


def cmd_bench(config: RunConfig, checkpoint: Optional[str] = None) -> Dict[str, Any]:
    """
    Runs a solver over a benchmark suite for every configured seed.

    Args:
        config: Run configuration; the ``bench`` section picks suite, solver and seeds
        checkpoint: Checkpoint path for the diffusion-backed solvers

    Returns:
        Dict with status, per-suite summary and result file paths or error message
    """
    try:
        needs_model = SolverKind(config.bench.solver) != SolverKind.CLASSIC_GP
        loaded = optional_model(config, checkpoint) if needs_model else None
        report = run_benchmark(
            config,
            loaded=loaded,
            output_dir=output_dir_for(config, "bench"),
            workers=workers_for(config),
        )
        return success(
            "cmd_bench",
            {
                "rows": len(report.rows),
                "failures": sum(1 for row in report.rows if row.status != "ok"),
                "suites": report.summary(),
                "results_csv": str(report.csv_path),
                "results_jsonl": str(report.jsonl_path),
                "summary_file": str(report.summary_path),
            },
            suite=config.bench.suite,
            solver=config.bench.solver,
            seeds=config.bench.seeds,
            schema_version=config.schema_version,
        )
    except Exception as e:
        return failure("cmd_bench", e, "run benchmark")


def cmd_ablation(
    config: RunConfig,
    problem: str = "Nguyen-5",
    checkpoint: Optional[str] = None,
    threshold: float = 0.99,
) -> Dict[str, Any]:
    """
    Compares generations-to-threshold for guided and unguided GP on one problem.

    Args:
        config: Run configuration (gp, guidance and bench.seeds)
        problem: Benchmark problem name
        checkpoint: Trained model for guidance; one-hot ground-truth logits otherwise
        threshold: Training R^2 to reach

    Returns:
        Dict with status and per-arm results or error message
    """
    try:
        loaded = optional_model(config, checkpoint)
        arms = run_ablation(config, problem, config.bench.seeds, threshold, loaded)
        data = {name: arm.to_dict() for name, arm in arms.items()}
        out = output_dir_for(config, "ablation")
        out.mkdir(parents=True, exist_ok=True)
        path = out / "ablation.json"
        path.write_text(
            json.dumps(
                {
                    "schema_version": config.schema_version,
                    "config": config.model_dump(mode="json"),
                    "problem": problem,
                    "threshold": threshold,
                    "arms": data,
                },
                indent=2,
            )
        )
        return success(
            "cmd_ablation",
            data,
            problem=problem,
            guidance="checkpoint" if loaded is not None else "oracle",
            report=str(path),
        )
    except Exception as e:
        return failure("cmd_ablation", e, "run ablation")
