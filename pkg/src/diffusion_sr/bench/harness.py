"""
Benchmark harness: run a solver over a suite and aggregate test R^2.

Suite means average per-problem means of test R^2 clamped below at 0; the
raw values are kept in every row.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Any, Optional

import pandas as pd
from joblib import Parallel, delayed

from ..config.run_config import SCHEMA_VERSION, RunConfig
from ..data.points import EvalSplit, PointSet
from ..decoding.sampling import LogitMatrix, one_hot_logits, point_condition, sample_x0
from ..decoding.topk import top_k_solve
from ..diffusion.checkpoint import LoadedModel
from ..errors import UsageError
from ..gp.evolution import evolve
from ..gp.islands import IslandsResult, island_rng, run_islands
from ..models.schemas import BenchmarkRow, Candidate, SolverKind
from ..symbolic.tokenizer import Vocabulary
from .problems import BenchmarkProblem, load_benchmark

logger = logging.getLogger(__name__)

RESULT_FORMAT = "diffusion-sr-bench"
ROW_COLUMNS = list(BenchmarkRow.model_fields)


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


@dataclass
class SolveOutcome:
    candidate: Candidate
    islands: Optional[IslandsResult] = None
    logits: Optional[LogitMatrix] = None


def guidance_logits(
    loaded: LoadedModel, points: PointSet, config: RunConfig, seed: int = 0
) -> LogitMatrix:
    """Logit matrix of one conditional reverse chain on ``points``."""
    condition, _ = point_condition(loaded, points)
    return sample_x0(
        loaded, condition, config.decode.seed + seed, clamp_each_step=config.decode.clamp_each_step
    ).logits


def solve_points(
    points: PointSet,
    solver: SolverKind | str,
    config: RunConfig,
    seed: int = 0,
    loaded: Optional[LoadedModel] = None,
    logits: Optional[LogitMatrix] = None,
    vocab: Optional[Vocabulary] = None,
    workers: int = 1,
) -> SolveOutcome:
    """Solve one point set with the chosen strategy.

    ``guided_gp`` takes ``logits`` when given (for example one-hot oracle
    logits) and otherwise samples them from ``loaded``. ``top_k`` needs
    ``loaded``.
    """
    solver = SolverKind(solver)
    if solver == SolverKind.CLASSIC_GP:
        result = run_islands(
            points, config.gp, config.guidance, seed=seed, workers=workers, decode=config.decode
        )
        return SolveOutcome(result.best, islands=result)
    if solver == SolverKind.GUIDED_GP:
        if logits is None:
            if loaded is None:
                raise UsageError("guided_gp needs a checkpoint or oracle logits")
            logits = guidance_logits(loaded, points, config, seed)
            vocab = loaded.vocab
        vocab = vocab or config.data.vocabulary()
        result = run_islands(
            points, config.gp, config.guidance, logits, vocab, seed=seed, workers=workers, decode=config.decode
        )
        return SolveOutcome(result.best, islands=result, logits=logits)
    if loaded is None:
        raise UsageError("top_k needs a checkpoint")
    decode = config.decode.model_copy(update={"seed": config.decode.seed + seed})
    return SolveOutcome(top_k_solve(loaded, points, decode, workers).best)


def solve_problem(
    problem: BenchmarkProblem,
    split: EvalSplit,
    solver: SolverKind,
    seed: int,
    config: RunConfig,
    loaded: Optional[LoadedModel] = None,
) -> BenchmarkRow:
    """One benchmark cell; a solver failure becomes an R^2 = 0 row."""
    try:
        candidate = solve_points(split.train, solver, config, seed, loaded).candidate
        scored = candidate.scored_on(split.test)
    except Exception as e:
        logger.warning(f"{problem.name} seed {seed}: {solver.value} failed: {e}")
        return BenchmarkRow.failed(problem.suite, problem.name, solver, seed, f"{type(e).__name__}: {e}")
    test_r2 = scored.test_r2 if scored.test_r2 is not None else -math.inf
    row = BenchmarkRow(
        suite=problem.suite,
        problem=problem.name,
        solver=solver,
        seed=seed,
        train_r2=scored.train_r2,
        test_r2=test_r2,
        test_r2_clamped=max(test_r2, 0.0) if math.isfinite(test_r2) else 0.0,
        complexity=scored.complexity,
        expression=scored.expr_infix,
    )
    logger.info(f"{problem.name} seed {seed}: test R2={test_r2:.4f} C={row.complexity} {row.expression}")
    return row


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow]
    config: RunConfig
    csv_path: Optional[Path] = None
    jsonl_path: Optional[Path] = None
    summary_path: Optional[Path] = None

    def frame(self) -> pd.DataFrame:
        records = [row.model_dump(mode="python") for row in self.rows]
        frame = pd.DataFrame(records, columns=ROW_COLUMNS)
        frame["solver"] = [row.solver.value for row in self.rows]
        return frame

    def per_problem(self) -> pd.DataFrame:
        frame = self.frame()
        return (
            frame.groupby(["suite", "problem"], sort=False)
            .agg(
                test_r2_clamped=("test_r2_clamped", "mean"),
                test_r2_median=("test_r2", "median"),
                complexity=("complexity", "mean"),
                failures=("status", lambda s: int((s != "ok").sum())),
            )
            .reset_index()
        )

    def summary(self) -> dict[str, dict[str, Any]]:
        """Per-suite means of the per-problem means."""
        problems = self.per_problem()
        frame = self.frame()
        out: dict[str, dict[str, Any]] = {}
        for suite, group in problems.groupby("suite", sort=False):
            raw = frame[frame["suite"] == suite]["test_r2"]
            out[str(suite)] = {
                "problems": int(len(group)),
                "mean_test_r2_clamped": float(group["test_r2_clamped"].mean()),
                "mean_test_r2_raw": _finite_or_none(float(raw.mean())),
                "mean_complexity": float(group["complexity"].mean()),
                "failures": int(group["failures"].sum()),
            }
        return out

    def write(self, output_dir: str | Path) -> "BenchmarkReport":
        """Write CSV, JSON-lines and summary files under ``output_dir``."""
        out = Path(output_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.csv_path = out / "bench_results.csv"
        self.frame().to_csv(self.csv_path, index=False, float_format="%.10g")
        self.jsonl_path = out / "bench_results.jsonl"
        header = {
            "format": RESULT_FORMAT,
            "schema_version": SCHEMA_VERSION,
            "config": self.config.model_dump(mode="json"),
        }
        with open(self.jsonl_path, "w") as handle:
            handle.write(json.dumps(header, sort_keys=True) + "\n")
            for row in self.rows:
                handle.write(row.model_dump_json() + "\n")
        self.summary_path = out / "bench_summary.json"
        payload = {**header, "suites": self.summary()}
        self.summary_path.write_text(json.dumps(payload, indent=2, sort_keys=True))
        logger.info(f"Wrote {len(self.rows)} benchmark rows to {self.csv_path}")
        return self


def run_benchmark(
    config: RunConfig,
    loaded: Optional[LoadedModel] = None,
    output_dir: Optional[str | Path] = None,
    workers: int = 1,
) -> BenchmarkReport:
    """Run ``config.bench.solver`` over ``config.bench.suite`` for every seed.

    Problems are sampled and split once with ``bench.split_seed``; solver
    seeds vary the search only. Rows come back in (problem, seed) order.
    """
    bench = config.bench
    solver = SolverKind(bench.solver)
    if solver != SolverKind.CLASSIC_GP and loaded is None:
        raise UsageError(f"Solver {solver.value} needs a checkpoint")
    problems = load_benchmark(
        bench.suite, bench.split_seed, bench.sampler, bench.train_fraction, bench.problems or None
    )
    tasks = [(problem, split, seed) for problem, split in problems for seed in bench.seeds]
    logger.info(f"Benchmark {bench.suite}/{solver.value}: {len(problems)} problems x {len(bench.seeds)} seeds")
    backend = "threads" if loaded is not None else "processes"
    rows = Parallel(n_jobs=min(workers, max(len(tasks), 1)), prefer=backend)(
        delayed(solve_problem)(problem, split, solver, seed, config, loaded)
        for problem, split, seed in tasks
    )
    report = BenchmarkReport(list(rows), config)
    if output_dir is not None:
        report.write(output_dir)
    return report


@dataclass
class AblationArm:
    name: str
    generations_to_threshold: list[int] = field(default_factory=list)
    final_r2: list[float] = field(default_factory=list)

    @property
    def median_generations(self) -> float:
        return float(median(self.generations_to_threshold))

    def to_dict(self) -> dict[str, Any]:
        return {
            "arm": self.name,
            "generations_to_threshold": self.generations_to_threshold,
            "median_generations": self.median_generations,
            "final_r2": [_finite_or_none(v) for v in self.final_r2],
        }


def run_ablation(
    config: RunConfig,
    problem: str = "Nguyen-5",
    seeds: Optional[list[int]] = None,
    threshold: float = 0.99,
    loaded: Optional[LoadedModel] = None,
) -> dict[str, AblationArm]:
    """Generations to reach ``threshold`` training R^2 with and without guidance.

    Guidance comes from ``loaded`` when given and from one-hot logits of the
    ground truth otherwise. Arms: ``guided`` (seeded population and guided
    mutation), ``mutation_only`` (guided mutation, random population) and
    ``unguided`` (classic GP). Runs that never reach the threshold count as
    ``generations + 1``. Every arm uses the same seeds.
    """
    seeds = seeds if seeds is not None else list(config.bench.seeds)
    [(bench_problem, split)] = load_benchmark(
        "all", config.bench.split_seed, config.bench.sampler, config.bench.train_fraction, [problem]
    )
    points = split.train
    if loaded is not None:
        logits = guidance_logits(loaded, points, config)
        vocab = loaded.vocab
    else:
        vocab = config.data.vocabulary()
        logits = one_hot_logits(bench_problem.ground_truth, vocab, config.canvas_length())
    gp = config.gp.model_copy(update={"early_stop_r2": threshold, "refine_best": False})
    guide = config.guidance
    arms = {
        "guided": (guide, logits),
        "mutation_only": (guide.model_copy(update={"seed_size": 0}), logits),
        "unguided": (guide.model_copy(update={"delta": 0.0, "seed_size": 0}), None),
    }
    report: dict[str, AblationArm] = {}
    for name, (arm_guide, arm_logits) in arms.items():
        arm = AblationArm(name)
        for seed in seeds:
            result = evolve(points, gp, arm_guide, island_rng(seed, 0), arm_logits, vocab, 0, config.decode)
            reached = result.generations_to(threshold)
            arm.generations_to_threshold.append(reached if reached is not None else gp.generations + 1)
            arm.final_r2.append(result.history[-1].best_r2)
        logger.info(f"Ablation {problem} arm {name}: median generations {arm.median_generations}")
        report[name] = arm
    return report
