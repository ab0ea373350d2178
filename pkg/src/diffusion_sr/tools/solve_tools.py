"""
Equation search on a user-supplied point set.
"""

import json
import logging
from typing import Any, Dict, Optional

from ..bench.harness import solve_points
from ..config.run_config import RunConfig
from ..data.points import load_points_file, split_points
from ..decoding.sampling import one_hot_logits
from ..models.schemas import SolverKind
from ..symbolic.parser import parse_infix
from .common import failure, optional_model, output_dir_for, success, workers_for

logger = logging.getLogger(__name__)


def cmd_solve(
    config: RunConfig,
    points_path: str,
    solver: Optional[str] = None,
    checkpoint: Optional[str] = None,
    oracle_expression: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Finds an equation for the points in a CSV or JSON file.

    The points are split 75/25; the solver sees the training part and the
    candidate is scored on both.

    Args:
        config: Run configuration
        points_path: Points file (CSV ``x_1..x_D, y`` or a corpus JSON record)
        solver: top_k, guided_gp or classic_gp; defaults to ``bench.solver``
        checkpoint: Checkpoint path for the diffusion-backed solvers
        oracle_expression: Infix expression whose one-hot logits guide guided_gp

    Returns:
        Dict with status and the candidate or error message
    """
    try:
        kind = SolverKind(solver or config.bench.solver)
        points = load_points_file(points_path)
        split = split_points(points, config.bench.split_seed, config.bench.train_fraction)
        loaded = optional_model(config, checkpoint) if kind != SolverKind.CLASSIC_GP else None

        logits = None
        vocab = loaded.vocab if loaded is not None else config.data.vocabulary()
        if oracle_expression is not None:
            canvas = loaded.canvas_length if loaded is not None else config.canvas_length()
            logits = one_hot_logits(parse_infix(oracle_expression), vocab, canvas)

        outcome = solve_points(
            split.train,
            kind,
            config,
            seed=config.decode.seed,
            loaded=loaded,
            logits=logits,
            vocab=vocab,
            workers=workers_for(config),
        )
        candidate = outcome.candidate.scored_on(split.test)

        out = output_dir_for(config, "solve")
        out.mkdir(parents=True, exist_ok=True)
        candidate_path = out / "candidate.json"
        candidate_path.write_text(
            json.dumps(
                {
                    "schema_version": config.schema_version,
                    "config": config.model_dump(mode="json"),
                    "candidate": candidate.model_dump(mode="json"),
                },
                indent=2,
            )
        )
        metadata: Dict[str, Any] = {
            "solver": kind.value,
            "candidate_file": str(candidate_path),
            "train_points": split.train.n_points,
            "test_points": split.test.n_points,
            "schema_version": config.schema_version,
        }
        if outcome.islands is not None:
            metadata["history_file"] = str(outcome.islands.write_history(out / "evolution_history.csv"))
        logger.info(f"Solved {points_path}: {candidate.expr_infix} test R2={candidate.test_r2}")
        return success("cmd_solve", candidate.model_dump(mode="json"), **metadata)
    except Exception as e:
        return failure("cmd_solve", e, "solve points")
