"""Point sets and synthetic corpus generation."""

from .corpus import CorpusRecord, build_corpus, generate_record, iter_corpus, load_corpus
from .generator import sample_points, sample_skeleton, substitute_constants
from .points import EvalSplit, PointSet, load_points_file, split_points, write_points_csv

__all__ = [
    "CorpusRecord",
    "EvalSplit",
    "PointSet",
    "build_corpus",
    "generate_record",
    "iter_corpus",
    "load_corpus",
    "load_points_file",
    "sample_points",
    "sample_skeleton",
    "split_points",
    "substitute_constants",
    "write_points_csv",
]
