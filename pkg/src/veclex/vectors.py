"""Dense vector primitives: validation, normalization, quantization, file I/O.

Vectors live in JSONL files, one object per line with an "id" string and a
"vector" array of numbers. All arithmetic is done in 64-bit floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import (
    DimensionMismatchError,
    DuplicateDocIdError,
    NonFiniteError,
    ParseError,
    ZeroVectorError,
)


@dataclass(frozen=True, eq=False)
class DenseVector:
    """An identified dense vector. Immutable; `values` is a read-only float64 array."""

    id: str
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ValueError("vector must be one-dimensional and non-empty")
        if not np.all(np.isfinite(values)):
            raise NonFiniteError(f"vector {self.id!r} has non-finite components")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])


class UnitVector(DenseVector):
    """A DenseVector whose Euclidean norm is 1 within 1e-9."""

    def __post_init__(self):
        super().__post_init__()
        norm = float(np.linalg.norm(self.values))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"vector {self.id!r} has norm {norm}, expected 1")


def normalize(v: DenseVector) -> UnitVector:
    """Scale `v` to unit Euclidean norm.

    Raises ZeroVectorError when every component is zero. Already-unit input
    passes through unchanged. Inputs of extreme magnitude, where squaring
    would overflow or underflow, are pre-scaled by their largest component
    before the norm is taken.
    """
    norm = float(np.linalg.norm(v.values))
    if not 1e-140 < norm < 1e140:
        amax = float(np.max(np.abs(v.values)))
        if amax == 0.0:
            raise ZeroVectorError(f"vector {v.id!r} has zero norm")
        scaled = v.values / amax
        return UnitVector(v.id, scaled / float(np.linalg.norm(scaled)))
    return UnitVector(v.id, v.values / norm)


def dot(a: DenseVector, b: DenseVector) -> float:
    """Inner product of two vectors; raises DimensionMismatchError on shape clash."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")
    return float(np.dot(a.values, b.values))


def quantize_fw(v: DenseVector, quantizer: int) -> np.ndarray:
    """Quantize components to signed integer counts.

    Component x maps to sign(x) * floor(quantizer * |x|). Components smaller
    in magnitude than 1/quantizer map to 0.
    """
    if quantizer < 2:
        raise ValueError("quantizer must be >= 2")
    counts = np.floor(quantizer * np.abs(v.values)).astype(np.int64)
    return np.where(v.values < 0, -counts, counts)


def quantized_dot_estimate(a: DenseVector, b: DenseVector, quantizer: int) -> float:
    """Approximate dot(a, b) from quantized components.

    Per-dimension products of opposite-signed counts are clamped to zero, so
    the estimate never goes negative from sign disagreements. For vectors with
    nonnegative components the absolute error is bounded by
    (||a||_1 + ||b||_1) / quantizer + dim / quantizer**2.
    """
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimensions differ: {a.dim} vs {b.dim}")
    qa = quantize_fw(a, quantizer)
    qb = quantize_fw(b, quantizer)
    products = np.maximum(qa * qb, 0)
    return float(products.sum()) / (quantizer * quantizer)


def read_vectors(path: str | Path) -> Iterator[DenseVector]:
    """Stream vectors from a JSONL file in file order.

    Every line must carry a string "id" and a numeric "vector" array of the
    same length as the first line's. Duplicate ids, dimension changes, and
    malformed lines raise with the 1-based line number.
    """
    dim: int | None = None
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", lineno) from exc
            if not isinstance(record, dict):
                raise ParseError("expected a JSON object", lineno)
            doc_id = record.get("id")
            raw = record.get("vector")
            if not isinstance(doc_id, str) or not doc_id:
                raise ParseError('missing or non-string "id"', lineno)
            if not isinstance(raw, list) or not raw:
                raise ParseError('missing or empty "vector" array', lineno)
            if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw):
                raise ParseError('"vector" must contain only numbers', lineno)
            if doc_id in seen:
                raise DuplicateDocIdError(f"line {lineno}: duplicate id {doc_id!r}")
            seen.add(doc_id)
            if dim is None:
                dim = len(raw)
            elif len(raw) != dim:
                raise DimensionMismatchError(
                    f"line {lineno}: vector has {len(raw)} dimensions, expected {dim}"
                )
            try:
                vector = DenseVector(doc_id, np.array(raw, dtype=np.float64))
            except NonFiniteError as exc:
                raise ParseError(str(exc), lineno) from exc
            yield vector


def write_vectors(path: str | Path, vectors: Iterable[DenseVector]) -> int:
    """Write vectors as JSONL; returns the number of lines written.

    Floats are serialized with shortest round-trip repr, so reading the file
    back reproduces the exact float64 values.
    """
    count = 0
    with open(path, "w", encoding="utf-8") as f:
        for v in vectors:
            f.write(json.dumps({"id": v.id, "vector": v.values.tolist()}))
            f.write("\n")
            count += 1
    return count


def l1_norm(v: DenseVector) -> float:
    return float(np.abs(v.values).sum())


def quantization_error_bound(a: DenseVector, b: DenseVector, quantizer: int) -> float:
    """Worst-case |quantized_dot_estimate - dot| for nonnegative vectors."""
    if quantizer < 2:
        raise ValueError("quantizer must be >= 2")
    return (l1_norm(a) + l1_norm(b)) / quantizer + a.dim / (quantizer * quantizer)
