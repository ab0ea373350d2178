"""
Top-K sampling: K independent reverse chains, each greedily decoded and
refined, reduced to the candidate with the best training R^2.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional

import torch
from joblib import Parallel, delayed

from ..config.run_config import DecodeConfig
from ..data.points import PointSet
from ..diffusion.checkpoint import LoadedModel
from ..errors import NoCandidateError, PrefixParseError
from ..models.schemas import Candidate, SolverKind
from ..symbolic.expression import max_variable_index
from ..symbolic.tokenizer import decode_expression
from .refinement import refine_constants
from .sampling import greedy_decode, point_condition, sample_x0

logger = logging.getLogger(__name__)


@dataclass
class TopKResult:
    best: Candidate
    candidates: list[Candidate] = field(default_factory=list)
    invalid: int = 0


def decode_candidate(
    loaded: LoadedModel,
    condition: Optional[torch.Tensor],
    points: PointSet,
    seed: int,
    config: DecodeConfig,
) -> Optional[Candidate]:
    """One Top-K run; ``None`` when the greedy decode does not parse."""
    sample = sample_x0(loaded, condition, seed, clamp_each_step=config.clamp_each_step)
    ids = greedy_decode(sample.logits)
    try:
        expr = decode_expression(ids, loaded.vocab)
    except PrefixParseError as e:
        logger.debug(f"Seed {seed}: invalid decode ({e})")
        return None
    if max_variable_index(expr) > points.dims:
        logger.debug(f"Seed {seed}: decode uses x_{max_variable_index(expr)} on {points.dims}-d points")
        return None
    result = refine_constants(expr, points, config, seed=seed)
    return Candidate.from_expression(result.expression, result.train_r2, seed, SolverKind.TOP_K)


def top_k_solve(
    loaded: LoadedModel,
    points: PointSet,
    config: Optional[DecodeConfig] = None,
    workers: int = 1,
) -> TopKResult:
    """Run ``config.top_k`` chains seeded ``config.seed + k`` on training points.

    Invalid decodes are skipped. Ties in training R^2 go to the lowest seed.
    Raises NoCandidateError when no run yields a usable expression.
    """
    config = config or DecodeConfig()
    condition, _ = point_condition(loaded, points)
    seeds = [config.seed + k for k in range(config.top_k)]
    results = Parallel(n_jobs=workers, prefer="threads")(
        delayed(decode_candidate)(loaded, condition, points, seed, config) for seed in seeds
    )
    candidates = [c for c in results if c is not None]
    invalid = len(seeds) - len(candidates)
    if invalid:
        logger.warning(f"{invalid} of {len(seeds)} Top-K decodes were invalid and skipped")
    if not candidates:
        raise NoCandidateError(f"None of the {len(seeds)} sampled sequences parsed into an expression")
    best = max(candidates, key=lambda c: (c.train_r2, -c.seed))
    logger.info(f"Top-K best (seed {best.seed}): {best.expr_infix} train R2={best.train_r2:.4f}")
    return TopKResult(best=best, candidates=candidates, invalid=invalid)
