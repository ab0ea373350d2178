"""
Result schemas shared by the solvers, the benchmark harness and the commands.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field, PrivateAttr

from ..bench.metrics import r2
from ..data.points import PointSet
from ..symbolic.expression import (
    Expression,
    complexity,
    evaluate_batch,
    parameters,
    prefix_symbols,
    to_infix,
)


class SolverKind(str, Enum):
    """Equation search strategies."""

    TOP_K = "top_k"
    GUIDED_GP = "guided_gp"
    CLASSIC_GP = "classic_gp"


class Candidate(BaseModel):
    """A solved equation with its scores."""

    expr_infix: str
    expr_prefix: List[str]
    constants: List[float] = Field(default_factory=list)
    train_r2: float
    test_r2: Optional[float] = None
    complexity: int
    seed: int
    solver: Optional[SolverKind] = None
    metadata: Dict[str, Any] = Field(default_factory=dict)

    _expression: Optional[Expression] = PrivateAttr(default=None)

    @classmethod
    def from_expression(
        cls,
        expr: Expression,
        train_r2: float,
        seed: int,
        solver: Optional[SolverKind] = None,
        **metadata: Any,
    ) -> "Candidate":
        candidate = cls(
            expr_infix=to_infix(expr),
            expr_prefix=prefix_symbols(expr),
            constants=[float(v) for v in parameters(expr)],
            train_r2=train_r2,
            complexity=complexity(expr),
            seed=seed,
            solver=solver,
            metadata=metadata,
        )
        candidate._expression = expr
        return candidate

    @property
    def expression(self) -> Expression:
        if self._expression is None:
            raise ValueError("Candidate was not built from an expression")
        return self._expression

    def scored_on(self, points: PointSet) -> "Candidate":
        """Copy with ``test_r2`` computed on held-out points."""
        scored = self.model_copy(
            update={"test_r2": r2(points.y, evaluate_batch(self.expression, points.Z))}
        )
        scored._expression = self._expression
        return scored


class BenchmarkRow(BaseModel):
    """One (problem, seed) outcome of a benchmark run."""

    suite: str
    problem: str
    solver: SolverKind
    seed: int
    status: str = "ok"
    train_r2: float = 0.0
    test_r2: float = 0.0
    test_r2_clamped: float = 0.0
    complexity: int = 0
    expression: str = ""
    message: Optional[str] = None

    @classmethod
    def failed(
        cls, suite: str, problem: str, solver: SolverKind, seed: int, message: str
    ) -> "BenchmarkRow":
        """Row recording a solver failure with R^2 = 0."""
        return cls(suite=suite, problem=problem, solver=solver, seed=seed, status="failed", message=message)
