"""
Exception hierarchy for diffusion-sr.

Library code raises these; the command layer in ``tools/`` converts them into
error envelopes carrying the exit code the CLI returns.
"""

from enum import Enum


class DiffusionSRError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class UsageError(DiffusionSRError):
    """Invalid configuration, flags or arguments."""

    exit_code = 1


class DataError(DiffusionSRError):
    """Malformed or unusable input data."""

    exit_code = 2


class EncodingError(DataError):
    """An expression or constant cannot be serialized with the vocabulary."""


class ParseErrorCode(str, Enum):
    """Distinct failure modes of prefix decoding."""

    EMPTY = "empty"
    ARITY_DEFICIT = "arity_deficit"
    TRAILING_TOKENS = "trailing_tokens"
    DANGLING_CONSTANT = "dangling_constant"
    UNEXPECTED_TOKEN = "unexpected_token"
    INFIX_SYNTAX = "infix_syntax"


class PrefixParseError(DataError):
    """A token sequence or infix string is not a well-formed expression."""

    def __init__(self, code: ParseErrorCode, message: str) -> None:
        super().__init__(f"[{code.value}] {message}")
        self.code = code


class DegenerateExpressionError(DataError):
    """An expression is invalid on almost all of its sampling domain."""


class UnknownSuiteError(DataError):
    """Benchmark suite name not recognised."""


class NumericError(DiffusionSRError):
    """Numerical failure during training, sampling or fitting."""

    exit_code = 3


class NaNLossError(NumericError):
    """Training produced a non-finite loss."""


class NoCandidateError(NumericError):
    """No decoded sample parsed into a usable expression."""


class RefinementFailedError(NumericError):
    """Constant refinement could not evaluate the expression anywhere."""


EXTERNAL_EXIT_CODES = {
    "ValidationError": 1,
    "FileNotFoundError": 2,
}


def exit_code_for(error: BaseException) -> int:
    """Exit code for an exception reaching the command layer."""
    if isinstance(error, DiffusionSRError):
        return error.exit_code
    return EXTERNAL_EXIT_CODES.get(type(error).__name__, DiffusionSRError.exit_code)
