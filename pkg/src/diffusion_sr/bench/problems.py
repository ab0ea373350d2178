"""
Benchmark problem definitions and their sampled train/test splits.
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Optional

import numpy as np

from ..data.points import EvalSplit, PointSet, split_points
from ..errors import DataError, UnknownSuiteError
from ..resources.benchmark_resources import SUITES, benchmark_table
from ..symbolic.expression import Expression, evaluate_batch
from ..symbolic.parser import parse_infix

logger = logging.getLogger(__name__)

Sampler = Literal["U", "E"]


@dataclass(frozen=True)
class SamplingSpec:
    """``U(low, high, count)`` uniform draws or ``E(low, high, count)`` grids."""

    kind: Sampler
    low: float
    high: float
    count: int

    def sample(self, rng: np.random.Generator, variables: int) -> np.ndarray:
        if self.kind == "U":
            return rng.uniform(self.low, self.high, size=(self.count, variables))
        grid = np.linspace(self.low, self.high, self.count)
        return np.column_stack([rng.permutation(grid) for _ in range(variables)])

    def __str__(self) -> str:
        return f"{self.kind}({self.low:g},{self.high:g},{self.count})"


@dataclass(frozen=True)
class BenchmarkProblem:
    suite: str
    name: str
    expression: str
    sampling: SamplingSpec
    variables: int
    index: int

    @cached_property
    def ground_truth(self) -> Expression:
        return parse_infix(self.expression)

    def sample(self, seed: int, sampler: Optional[Sampler] = None) -> PointSet:
        """Sample inputs and evaluate the ground truth on them.

        The RNG depends on the seed and the problem's position in the table
        only. Rows where the ground truth is undefined are dropped.
        """
        spec = self.sampling
        if sampler is not None and sampler != spec.kind:
            spec = SamplingSpec(sampler, spec.low, spec.high, spec.count)
        rng = np.random.default_rng(np.random.SeedSequence([seed, self.index]))
        Z = spec.sample(rng, self.variables)
        y = evaluate_batch(self.ground_truth, Z)
        keep = np.isfinite(y)
        if not keep.all():
            logger.warning(f"{self.name}: dropped {int((~keep).sum())} points where the target is undefined")
        if keep.sum() < 2:
            raise DataError(f"{self.name}: ground truth is undefined on the sampled points")
        return PointSet(Z[keep], y[keep])


def load_problems(suite: str = "all", names: Optional[list[str]] = None) -> list[BenchmarkProblem]:
    """Problems of a suite in file order, optionally restricted by name."""
    key = suite.strip().lower()
    if key != "all" and key not in SUITES:
        raise UnknownSuiteError(f"Unknown suite {suite!r}; expected one of {', '.join(SUITES)}, all")
    table = benchmark_table()
    problems = []
    for index, row in enumerate(table.to_dict(orient="records")):
        if key != "all" and row["suite"] != key:
            continue
        problems.append(
            BenchmarkProblem(
                suite=row["suite"],
                name=row["name"],
                expression=row["expression"],
                sampling=SamplingSpec(
                    row["sampler"], float(row["low"]), float(row["high"]), int(row["count"])
                ),
                variables=int(row["variables"]),
                index=index,
            )
        )
    if names:
        wanted = {n.lower() for n in names}
        problems = [p for p in problems if p.name.lower() in wanted]
        missing = wanted - {p.name.lower() for p in problems}
        if missing:
            raise UnknownSuiteError(f"Unknown problems in suite {suite!r}: {', '.join(sorted(missing))}")
    return problems


def load_benchmark(
    suite: str,
    seed: int = 0,
    sampler: Optional[Sampler] = None,
    train_fraction: float = 0.75,
    names: Optional[list[str]] = None,
) -> list[tuple[BenchmarkProblem, EvalSplit]]:
    """Sample every problem of ``suite`` and split it 75/25 by ``seed``."""
    return [
        (problem, split_points(problem.sample(seed, sampler), seed, train_fraction))
        for problem in load_problems(suite, names)
    ]
