"""Result schemas and the process-wide checkpoint cache."""

from .model_manager import ModelManager
from .schemas import BenchmarkRow, Candidate, SolverKind

__all__ = ["BenchmarkRow", "Candidate", "ModelManager", "SolverKind"]
