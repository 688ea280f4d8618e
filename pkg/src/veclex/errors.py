"""Exception types raised across the package."""

from __future__ import annotations


class VeclexError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVectorError(VeclexError):
    """A vector with zero norm was given where a direction is required."""


class NonFiniteError(VeclexError):
    """A vector contains NaN or infinite components."""


class DimensionMismatchError(VeclexError):
    """Vectors of inconsistent dimensionality were mixed."""


class ParseError(VeclexError):
    """An input file violates its expected format.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DuplicateDocIdError(VeclexError):
    """The same document id appeared more than once in a corpus."""


class EmptyCorpusError(VeclexError):
    """An index build was attempted over zero documents."""


class EmptyInputError(VeclexError):
    """An encoder stage received no items to work with."""


class CorruptIndexError(VeclexError):
    """An on-disk index is missing, truncated, or fails validation."""


class OrdinalOutOfRangeError(VeclexError):
    """A document ordinal outside [0, N) was requested."""


class EncoderMismatchError(VeclexError):
    """A query was encoded under a different configuration than the index."""


class UnknownMetricError(VeclexError):
    """A metric specification string names no supported metric."""


class DuplicatePairError(VeclexError):
    """A (query, document) pair appeared twice in a qrels file."""


class NoRelevantDocsError(VeclexError):
    """Recall is undefined for a query with no relevant documents."""
