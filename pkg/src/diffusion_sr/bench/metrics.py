"""
Fit, diversity and validity metrics.
"""

import math
from collections import Counter
from typing import Sequence

import numpy as np
from nltk.translate.bleu_score import SmoothingFunction, sentence_bleu

from ..errors import DataError
from ..symbolic.expression import Expression, complexity
from ..symbolic.tokenizer import Vocabulary, is_valid_prefix

BLEU_WEIGHTS = (0.25, 0.25, 0.25, 0.25)


def r2(actual: Sequence[float] | np.ndarray, predicted: Sequence[float] | np.ndarray) -> float:
    """Coefficient of determination.

    Returns -inf when any prediction is non-finite. Raises DataError for
    fewer than two points or constant ``actual``.
    """
    y = np.asarray(actual, dtype=float).reshape(-1)
    y_hat = np.asarray(predicted, dtype=float).reshape(-1)
    if y.shape != y_hat.shape:
        raise DataError(f"Length mismatch: {y.shape[0]} actual vs {y_hat.shape[0]} predicted")
    if y.shape[0] < 2:
        raise DataError("R^2 needs at least two points")
    total = float(np.sum((y - y.mean()) ** 2))
    if total == 0.0:
        raise DataError("R^2 is undefined for constant targets")
    if not np.isfinite(y_hat).all():
        return -math.inf
    with np.errstate(over="ignore"):
        residual = float(np.sum((y - y_hat) ** 2))
    if not math.isfinite(residual):
        return -math.inf
    return 1.0 - residual / total


def rmse(actual: Sequence[float] | np.ndarray, predicted: Sequence[float] | np.ndarray) -> float:
    """Root mean squared error; +inf when any prediction is non-finite."""
    y = np.asarray(actual, dtype=float).reshape(-1)
    y_hat = np.asarray(predicted, dtype=float).reshape(-1)
    if not np.isfinite(y_hat).all():
        return math.inf
    with np.errstate(over="ignore"):
        value = float(np.sqrt(np.mean((y - y_hat) ** 2)))
    return value if math.isfinite(value) else math.inf


def _as_tokens(seq: Sequence[int] | Sequence[str], vocab: Vocabulary | None) -> list[str]:
    if vocab is None:
        return [str(t) for t in seq]
    return vocab.to_tokens(vocab.strip_padding([int(t) for t in seq]))


def self_bleu(
    sequences: Sequence[Sequence[int]] | Sequence[Sequence[str]],
    vocab: Vocabulary | None = None,
) -> float:
    """Mean BLEU-4 of each sequence against all the others; lower is more diverse.

    Uses uniform 1..4-gram weights, add-one smoothing of higher-order n-gram
    counts and the standard brevity penalty. With a vocabulary, integer
    sequences are stripped of padding and mapped to token strings.
    """
    if len(sequences) < 2:
        raise DataError("Self-BLEU needs at least two sequences")
    tokens = [_as_tokens(s, vocab) for s in sequences]
    smoothing = SmoothingFunction().method2
    scores = []
    for i, hypothesis in enumerate(tokens):
        references = tokens[:i] + tokens[i + 1 :]
        scores.append(
            sentence_bleu(
                references, hypothesis, weights=BLEU_WEIGHTS, smoothing_function=smoothing
            )
        )
    return float(np.mean(scores))


def complexity_entropy(exprs: Sequence[Expression] | Sequence[int]) -> float:
    """Shannon entropy (nats) of the empirical distribution of complexities."""
    if len(exprs) == 0:
        raise DataError("Complexity entropy needs at least one expression")
    values = [e if isinstance(e, int) else complexity(e) for e in exprs]
    counts = np.array(list(Counter(values).values()), dtype=float)
    probs = counts / counts.sum()
    return float(-np.sum(probs * np.log(probs)))


def valid_rate(sequences: Sequence[Sequence[int]], vocab: Vocabulary) -> float:
    """Fraction of sequences forming a complete prefix expression."""
    if len(sequences) == 0:
        raise DataError("Valid rate needs at least one sequence")
    return sum(is_valid_prefix(s, vocab) for s in sequences) / len(sequences)
