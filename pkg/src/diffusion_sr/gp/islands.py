"""
Independent GP islands run in parallel with a deterministic reduction.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from ..config.run_config import DecodeConfig, GpConfig, GuidanceConfig
from ..data.points import PointSet
from ..decoding.sampling import LogitMatrix
from ..models.schemas import Candidate
from ..symbolic.tokenizer import Vocabulary
from .evolution import EvolutionResult, evolve

logger = logging.getLogger(__name__)

HISTORY_COLUMNS = ["island", "generation", "best_rmse", "mean_rmse", "best_r2"]


@dataclass
class IslandsResult:
    best: Candidate
    islands: list[EvolutionResult] = field(default_factory=list)

    def history_frame(self) -> pd.DataFrame:
        rows = [stats.to_dict() for result in self.islands for stats in result.history]
        return pd.DataFrame(rows, columns=HISTORY_COLUMNS)

    def write_history(self, path: str | Path) -> Path:
        """Write the per-island, per-generation history as CSV."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.history_frame().to_csv(path, index=False)
        return path


def island_rng(seed: int, island: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, island]))


def _run_island(
    points: PointSet,
    gp: GpConfig,
    guide: GuidanceConfig,
    logits: Optional[LogitMatrix],
    vocab: Optional[Vocabulary],
    seed: int,
    island: int,
    decode: Optional[DecodeConfig],
) -> EvolutionResult:
    logger.info(f"Island {island} starting (seed {seed})")
    return evolve(points, gp, guide, island_rng(seed, island), logits, vocab, island, decode)


def run_islands(
    points: PointSet,
    gp: Optional[GpConfig] = None,
    guide: Optional[GuidanceConfig] = None,
    logits: Optional[LogitMatrix] = None,
    vocab: Optional[Vocabulary] = None,
    n_islands: Optional[int] = None,
    seed: int = 0,
    workers: int = 1,
    decode: Optional[DecodeConfig] = None,
) -> IslandsResult:
    """Run independent evolutions and keep the overall best.

    Island ``i`` draws from ``SeedSequence([seed, i])``. The best candidate
    has the lowest training RMSE; ties go to lower complexity, then to the
    lower island index, so completion order never matters.
    """
    gp = gp or GpConfig()
    guide = guide or GuidanceConfig()
    n = n_islands if n_islands is not None else guide.islands
    results: list[EvolutionResult] = Parallel(n_jobs=min(workers, n))(
        delayed(_run_island)(points, gp, guide, logits, vocab, seed, island, decode)
        for island in range(n)
    )
    winner = min(
        results, key=lambda r: (r.best.fitness, r.candidate.complexity, r.island)
    )
    logger.info(
        f"Best of {n} islands: island {winner.island} {winner.candidate.expr_infix} "
        f"train R2={winner.candidate.train_r2:.4f}"
    )
    return IslandsResult(best=winner.candidate, islands=list(results))
