"""Turn dense vectors into term bags a classic inverted index can store.

Two encodings are provided:

* fake words ("fw"): each dimension becomes a synthetic term whose within-
  document frequency is the quantized component magnitude, so the index's
  tf statistics carry the vector geometry.
* lexical LSH ("lexlsh"): components are rounded to a fixed number of
  decimals, rendered as position-tagged tokens, shingled into n-grams, and
  sketched into exactly `buckets` min-hash terms per vector.

A term bag is a plain dict mapping term text to a frequency >= 1.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from .errors import EmptyInputError
from .vectors import DenseVector, UnitVector, normalize, quantize_fw

TermBag = dict[str, int]

FAKE_WORDS = "fw"
LEXICAL_LSH = "lexlsh"


@dataclass(frozen=True)
class EncoderConfig:
    """Parameters that fix a vector-to-terms encoding.

    kind "fw" uses `quantizer` only; kind "lexlsh" uses `decimals`,
    `ngram` and `buckets`. Two configs compare equal exactly when they
    produce identical term bags for every input.
    """

    kind: str
    quantizer: int | None = None
    decimals: int = 1
    ngram: int = 2
    buckets: int | None = None

    def __post_init__(self):
        if self.kind == FAKE_WORDS:
            if self.quantizer is None or self.quantizer < 2:
                raise ValueError("fake words encoding needs quantizer >= 2")
        elif self.kind == LEXICAL_LSH:
            if self.buckets is None or self.buckets < 1:
                raise ValueError("lexical LSH encoding needs buckets >= 1")
            if self.decimals < 1:
                raise ValueError("decimals must be >= 1")
            if self.ngram < 1:
                raise ValueError("ngram must be >= 1")
        else:
            raise ValueError(f"unknown encoder kind {self.kind!r}")

    @classmethod
    def fake_words(cls, quantizer: int) -> "EncoderConfig":
        return cls(kind=FAKE_WORDS, quantizer=quantizer)

    @classmethod
    def lexical_lsh(cls, buckets: int, decimals: int = 1, ngram: int = 2) -> "EncoderConfig":
        return cls(kind=LEXICAL_LSH, buckets=buckets, decimals=decimals, ngram=ngram)

    def to_dict(self) -> dict:
        if self.kind == FAKE_WORDS:
            return {"kind": self.kind, "quantizer": self.quantizer}
        return {
            "kind": self.kind,
            "buckets": self.buckets,
            "decimals": self.decimals,
            "ngram": self.ngram,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EncoderConfig":
        kind = data.get("kind")
        if kind == FAKE_WORDS:
            return cls.fake_words(int(data["quantizer"]))
        if kind == LEXICAL_LSH:
            return cls.lexical_lsh(
                int(data["buckets"]), int(data.get("decimals", 1)), int(data.get("ngram", 2))
            )
        raise ValueError(f"unknown encoder kind {kind!r}")

    def label(self) -> str:
        if self.kind == FAKE_WORDS:
            return f"fw q={self.quantizer}"
        return f"lexlsh b={self.buckets}"


def encode_fake_words(v: UnitVector, quantizer: int) -> TermBag:
    """Encode a unit vector as sign-split dimension terms.

    Dimension i with positive component yields term "f<i>p", negative "f<i>n",
    each with frequency floor(quantizer * |component|). Dimensions whose
    quantized magnitude is zero emit nothing, so the bag can be empty.
    """
    counts = quantize_fw(v, quantizer)
    bag: TermBag = {}
    for i in counts.nonzero()[0].tolist():
        c = int(counts[i])
        if c > 0:
            bag[f"f{i}p"] = c
        else:
            bag[f"f{i}n"] = -c
    return bag


def _render_token(position: int, value: float, quantum: Decimal) -> str:
    # Round half away from zero on the shortest decimal repr of the float,
    # so e.g. -0.15 at one decimal gives -0.2, not -0.1.
    q = Decimal(repr(value)).quantize(quantum, rounding=ROUND_HALF_UP)
    if q == 0:
        q = abs(q)  # never render "-0.0"
    return f"{position}_{q}"


def lex_tokens(v: DenseVector, decimals: int) -> list[str]:
    """Render each component as a position-tagged decimal token.

    Token i (1-based) is "<i>_<value>" where the value is rounded half away
    from zero to `decimals` places and always printed with exactly that many
    decimal digits. Zero-valued components keep their token.
    """
    if decimals < 1:
        raise ValueError("decimals must be >= 1")
    quantum = Decimal(1).scaleb(-decimals)
    return [_render_token(i + 1, x, quantum) for i, x in enumerate(v.values.tolist())]


def shingle(tokens: list[str], n: int) -> list[str]:
    """Overlapping n-grams joined by a single space, preserving order.

    Fewer than n tokens collapse to one shingle holding all of them; empty
    input yields no shingles.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not tokens:
        return []
    if len(tokens) < n:
        return [" ".join(tokens)]
    return [" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def stable_hash64(data: bytes) -> int:
    """64-bit hash of `data`: BLAKE2b with an 8-byte digest, read big-endian.

    Deterministic across processes, platforms, and releases; the empty input
    hashes to 0xe4a6a0577479b2b4.
    """
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def minhash_signature(ngrams: list[str], buckets: int) -> list[str]:
    """Sketch n-grams into exactly `buckets` min-hash terms.

    Each n-gram hashes to a bucket via floor(buckets * h / 2**64) and every
    bucket keeps the minimum hash it received. Buckets that received nothing
    take the value of the next non-empty bucket, scanning forward cyclically,
    so the output always has `buckets` terms. Term text is
    "lsh_<bucket>_<min hash as lowercase hex>".
    """
    if buckets < 1:
        raise ValueError("buckets must be >= 1")
    if not ngrams:
        raise EmptyInputError("cannot build a signature from zero n-grams")
    mins: list[int | None] = [None] * buckets
    for gram in ngrams:
        h = stable_hash64(gram.encode("utf-8"))
        bucket = (h * buckets) >> 64
        current = mins[bucket]
        if current is None or h < current:
            mins[bucket] = h
    carry: int | None = None
    for value in mins:
        if value is not None:
            carry = value
            break
    # Backward pass: each empty slot inherits from the nearest non-empty
    # bucket after it, wrapping around past the end.
    for i in range(buckets - 1, -1, -1):
        if mins[i] is None:
            mins[i] = carry
        else:
            carry = mins[i]
    return [f"lsh_{i}_{mins[i]:x}" for i in range(buckets)]


def encode_lexical_lsh(v: DenseVector, decimals: int, ngram: int, buckets: int) -> TermBag:
    """Encode a vector as exactly `buckets` min-hash terms, all with frequency 1."""
    grams = shingle(lex_tokens(v, decimals), ngram)
    return {term: 1 for term in minhash_signature(grams, buckets)}


def encode_vector(config: EncoderConfig, v: DenseVector) -> TermBag:
    """Encode under `config`: fake words normalize first, lexical LSH does not."""
    if config.kind == FAKE_WORDS:
        return encode_fake_words(normalize(v), config.quantizer)
    return encode_lexical_lsh(v, config.decimals, config.ngram, config.buckets)
