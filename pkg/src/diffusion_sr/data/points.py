"""
Numeric point sets, train/test splits and points-file I/O.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from ..errors import DataError

logger = logging.getLogger(__name__)

MAX_DIMS = 3


@dataclass(frozen=True)
class PointSet:
    """Inputs ``Z`` (N x D) and targets ``y`` (N)."""

    Z: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        Z = np.atleast_2d(np.asarray(self.Z, dtype=float))
        y = np.asarray(self.y, dtype=float).reshape(-1)
        if Z.shape[0] != y.shape[0]:
            raise DataError(f"Z has {Z.shape[0]} rows but y has {y.shape[0]} values")
        if Z.shape[0] < 1:
            raise DataError("A point set needs at least one point")
        if not (np.isfinite(Z).all() and np.isfinite(y).all()):
            raise DataError("Point sets must contain only finite values")
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "y", y)

    @property
    def n_points(self) -> int:
        return int(self.Z.shape[0])

    @property
    def dims(self) -> int:
        return int(self.Z.shape[1])

    def subset(self, indices: np.ndarray) -> "PointSet":
        return PointSet(self.Z[indices], self.y[indices])

    def permuted(self, permutation: np.ndarray) -> "PointSet":
        return self.subset(np.asarray(permutation))

    def to_dict(self) -> dict[str, Any]:
        return {"Z": self.Z.tolist(), "y": self.y.tolist()}

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "PointSet":
        try:
            return cls(np.asarray(payload["Z"], dtype=float), np.asarray(payload["y"], dtype=float))
        except KeyError as e:
            raise DataError(f"Point payload missing field {e.args[0]!r}") from None


@dataclass(frozen=True)
class EvalSplit:
    """Disjoint train/test partition of one sampled point set."""

    train: PointSet
    test: PointSet
    seed: int


def split_points(points: PointSet, seed: int, train_fraction: float = 0.75) -> EvalSplit:
    """Deterministic shuffled split; ``round(fraction * N)`` points go to train."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(points.n_points)
    n_train = int(round(train_fraction * points.n_points))
    n_train = min(max(n_train, 1), points.n_points)
    train_idx = np.sort(order[:n_train])
    test_idx = np.sort(order[n_train:])
    test = points.subset(test_idx) if len(test_idx) else points.subset(train_idx)
    return EvalSplit(train=points.subset(train_idx), test=test, seed=seed)


def load_points_file(path: str | Path) -> PointSet:
    """Load a points file.

    CSV files need a header ``x_1, ..., x_D, y``. JSON files may hold a
    corpus record (``{"points": {"Z": ..., "y": ...}}``) or the bare
    ``{"Z": ..., "y": ...}`` payload; for JSON-lines the first record is used.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Points file not found: {path}")
    suffix = path.suffix.lower()
    if suffix in (".json", ".jsonl"):
        text = path.read_text().strip()
        if not text:
            raise DataError(f"Points file {path} is empty")
        line = text.splitlines()[0] if suffix == ".jsonl" else text
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as e:
            raise DataError(f"Points file {path} is not valid JSON: {e}") from e
        if "points" in payload:
            payload = payload["points"]
        return PointSet.from_dict(payload)
    return _load_points_csv(path)


def _load_points_csv(path: Path) -> PointSet:
    try:
        frame = pd.read_csv(path)
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataError(f"Cannot read points CSV {path}: {e}") from e
    columns = [c.strip() for c in frame.columns]
    frame.columns = columns
    if "y" not in columns:
        raise DataError(f"Points CSV {path} has no 'y' column")
    x_cols = [f"x_{d}" for d in range(1, len(columns))]
    missing = [c for c in x_cols if c not in columns]
    if missing or not x_cols:
        raise DataError(
            f"Points CSV {path} must have columns x_1..x_D and y, got {columns}"
        )
    if len(x_cols) > MAX_DIMS:
        logger.warning(f"Points file has {len(x_cols)} input columns; vocabularies default to {MAX_DIMS}")
    return PointSet(frame[x_cols].to_numpy(dtype=float), frame["y"].to_numpy(dtype=float))


def write_points_csv(points: PointSet, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(points.Z, columns=[f"x_{d}" for d in range(1, points.dims + 1)])
    frame["y"] = points.y
    frame.to_csv(path, index=False, float_format="%.17g")
    return path
