"""
Synthetic training corpus: record generation and JSON-lines serialization.

A corpus file starts with one header line followed by one record per line::

    {"format": "diffusion-sr-corpus", "version": 1, "requested": ..., ...}
    {"skeleton": [...], "full": [...], "points": {"Z": [[...]], "y": [...]}, "seed": ...}

Paths ending in ``.gz`` are gzip-compressed. Each record derives its RNG
from ``(seed, record index)``, so output does not depend on worker count.
"""

import gzip
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, Iterator, Optional

import numpy as np
from joblib import Parallel, delayed

from ..config.run_config import DataConfig
from ..errors import DataError, DegenerateExpressionError, EncodingError
from ..symbolic.expression import Expression, fill_placeholders, to_infix
from ..symbolic.tokenizer import VocabMode, decode_expression, encode_expression
from .generator import sample_points, sample_skeleton, substitute_constants
from .points import PointSet

logger = logging.getLogger(__name__)

CORPUS_FORMAT = "diffusion-sr-corpus"
CORPUS_VERSION = 1
MAX_RECORD_ATTEMPTS = 50


@dataclass(frozen=True)
class CorpusRecord:
    """One training example.

    ``full`` decodes to the expression that generated ``points.y``.
    """

    skeleton: list[str]
    full: list[str]
    points: PointSet
    seed: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "skeleton": self.skeleton,
                "full": self.full,
                "points": self.points.to_dict(),
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, line: str) -> "CorpusRecord":
        try:
            payload = json.loads(line)
            return cls(
                skeleton=list(payload["skeleton"]),
                full=list(payload["full"]),
                points=PointSet.from_dict(payload["points"]),
                seed=int(payload["seed"]),
            )
        except (json.JSONDecodeError, KeyError, TypeError) as e:
            raise DataError(f"Malformed corpus record: {e}") from e


def record_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


def generate_record(index: int, seed: int, config: DataConfig) -> CorpusRecord:
    """Generate the record at ``index`` of the corpus seeded with ``seed``."""
    sequence = record_seed(seed, index)
    rng = np.random.default_rng(sequence)
    skeleton_vocab = config.vocabulary(VocabMode.SKELETON)
    full_vocab = config.vocabulary(VocabMode.FULL)
    limits = config.limits
    for _ in range(MAX_RECORD_ATTEMPTS):
        dims = int(rng.integers(1, config.max_dims + 1))
        skeleton = sample_skeleton(rng, limits, dims)
        full = substitute_constants(
            skeleton,
            rng,
            (config.additive_low, config.additive_high),
            (config.multiplicative_low, config.multiplicative_high),
            mantissa_digits=config.mantissa_digits,
        )
        try:
            skeleton_ids = encode_expression(
                skeleton, skeleton_vocab, skeleton_vocab.default_canvas_length
            )
            full_ids = encode_expression(full, full_vocab, full_vocab.default_canvas_length)
            points = sample_points(
                full,
                rng,
                n_max=config.n_max,
                n_min=config.n_min,
                dims=dims,
                input_range=(config.input_low, config.input_high),
                max_abs_target=config.max_abs_target,
                min_acceptance=config.min_acceptance,
            )
        except (DegenerateExpressionError, EncodingError):
            continue
        return CorpusRecord(
            skeleton=skeleton_vocab.to_tokens(skeleton_vocab.strip_padding(skeleton_ids)),
            full=full_vocab.to_tokens(full_vocab.strip_padding(full_ids)),
            points=points,
            seed=int(sequence.generate_state(1, dtype=np.uint64)[0]),
        )
    raise DegenerateExpressionError(
        f"Record {index} of seed {seed}: no usable expression in {MAX_RECORD_ATTEMPTS} attempts"
    )


def _generate_chunk(start: int, stop: int, seed: int, config: DataConfig) -> list[CorpusRecord]:
    return [generate_record(i, seed, config) for i in range(start, stop)]


def _open(path: Path, mode: str) -> IO[str]:
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")  # type: ignore[return-value]
    return open(path, mode, encoding="utf-8")


def _dedup_key(record: CorpusRecord, config: DataConfig) -> str:
    vocab = config.vocabulary(VocabMode.SKELETON)
    return to_infix(decode_expression(vocab.to_ids(record.skeleton), vocab))


def build_corpus(
    count: int,
    seed: int,
    config: DataConfig,
    path: str | Path,
    workers: int = 1,
) -> dict[str, Any]:
    """Generate ``count`` records and stream them to ``path``.

    With ``config.dedup`` records whose simplified skeleton was already
    written are skipped and generation continues at later indices until
    ``count`` unique records exist or ten times ``count`` indices are spent.

    Returns:
        Summary with the path, number of written records and indices used
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = {
        "format": CORPUS_FORMAT,
        "version": CORPUS_VERSION,
        "requested": count,
        "seed": seed,
        "config": config.model_dump(mode="json"),
    }
    written = 0
    next_index = 0
    index_budget = count * 10 if config.dedup else count
    seen: set[str] = set()
    logger.info(f"Building corpus of {count} records at {path} (seed={seed}, workers={workers})")
    with _open(path, "w") as handle, Parallel(n_jobs=workers) as parallel:
        handle.write(json.dumps(header, sort_keys=True) + "\n")
        while written < count and next_index < index_budget:
            shard = config.shard_size
            bounds = []
            for _ in range(max(workers, 1)):
                if next_index >= index_budget:
                    break
                stop = min(next_index + shard, index_budget)
                if not config.dedup:
                    stop = min(stop, count)
                bounds.append((next_index, stop))
                next_index = stop
            chunks = parallel(
                delayed(_generate_chunk)(start, stop, seed, config) for start, stop in bounds
            )
            for chunk in chunks:
                for record in chunk:
                    if written >= count:
                        break
                    if config.dedup:
                        key = _dedup_key(record, config)
                        if key in seen:
                            continue
                        seen.add(key)
                    handle.write(record.to_json() + "\n")
                    written += 1
            logger.info(f"Corpus progress: {written}/{count} records")
    if written < count:
        logger.warning(f"Corpus has {written} unique records, fewer than the {count} requested")
    return {"path": str(path), "records": written, "indices_used": next_index}


def read_corpus_header(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Corpus not found: {path}")
    with _open(path, "r") as handle:
        first = handle.readline()
    try:
        header = json.loads(first)
    except json.JSONDecodeError as e:
        raise DataError(f"Corpus {path} has no valid header: {e}") from e
    if header.get("format") != CORPUS_FORMAT:
        raise DataError(f"{path} is not a diffusion-sr corpus")
    if header.get("version") != CORPUS_VERSION:
        raise DataError(f"Unsupported corpus version {header.get('version')}")
    return dict(header)


def iter_corpus(path: str | Path, limit: Optional[int] = None) -> Iterator[CorpusRecord]:
    """Stream records, validating the header first."""
    path = Path(path)
    read_corpus_header(path)
    with _open(path, "r") as handle:
        handle.readline()
        for i, line in enumerate(handle):
            if limit is not None and i >= limit:
                return
            if line.strip():
                yield CorpusRecord.from_json(line)


def load_corpus(path: str | Path, limit: Optional[int] = None) -> list[CorpusRecord]:
    return list(iter_corpus(path, limit))


def record_expression(record: CorpusRecord, config: DataConfig, full: bool = True) -> Expression:
    """Decode a record's expression; skeletons get placeholders filled with 1.0."""
    mode = VocabMode.FULL if full else VocabMode.SKELETON
    vocab = config.vocabulary(mode)
    expr = decode_expression(vocab.to_ids(record.full if full else record.skeleton), vocab)
    return expr if full else fill_placeholders(expr)
