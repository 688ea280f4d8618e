"""Top-k retrieval: inverted-index scoring and the exact brute-force oracle.

The index scorer implements a classic tf-idf similarity:

    score(q, d) = coord(q, d) * sum over matching terms t of
                  qtf(t) * sqrt(f(t, d)) * idf(t)^2 / sqrt(len(d))

where qtf is the term's frequency in the query bag, f(t, d) its frequency in
the document, len(d) the document's total token count, coord the fraction of
distinct query terms present in d, and idf(t) = 1 + ln(N / (df(t) + 1)).
The query-side normalizer constant is dropped: it scales every candidate of
a query equally, so rankings are unchanged.

Ties are always broken by ascending external document id, and scoring a
query is single-threaded and order-fixed, so results never depend on how
many worker threads process a batch.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .encoders import EncoderConfig, TermBag, encode_vector
from .errors import DimensionMismatchError, EncoderMismatchError
from .index import InvertedIndex
from .vectors import DenseVector, normalize


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    score: float


@dataclass(frozen=True)
class RankedList:
    """Results for one query: scores non-increasing, doc ids unique."""

    query_id: str
    hits: tuple[ScoredDoc, ...]


def idf(num_docs: int, doc_freq: int) -> float:
    """Inverse document frequency: 1 + ln(N / (df + 1)).

    Always finite for N >= 1; may dip below 1 when df is close to N.
    """
    if num_docs < 1:
        raise ValueError("num_docs must be >= 1")
    if doc_freq < 0:
        raise ValueError("doc_freq must be >= 0")
    return 1.0 + math.log(num_docs / (doc_freq + 1))


def _top_k(scores: np.ndarray, candidates: np.ndarray, doc_ids: list[str], k: int) -> list[int]:
    """Indices into `candidates` of the k best, score desc then doc id asc."""
    if len(candidates) > k:
        # Keep every candidate tied with the k-th score so the id tie-break
        # sees all of them, then sort just that slice.
        kth = np.partition(scores, len(scores) - k)[len(scores) - k]
        local = np.nonzero(scores >= kth)[0]
    else:
        local = np.arange(len(candidates))
    order = sorted(local.tolist(), key=lambda j: (-scores[j], doc_ids[candidates[j]]))
    return order[:k]


def score_query(
    index: InvertedIndex,
    query_bag: TermBag,
    k: int,
    query_id: str = "",
    expected_config: EncoderConfig | None = None,
) -> RankedList:
    """Score one encoded query against the index, term at a time, no pruning.

    Only documents sharing at least one term with the query and having a
    nonzero token count are candidates. Pass `expected_config` to assert the
    bag was produced under the index's own encoder configuration.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if expected_config is not None and expected_config != index.meta.config:
        raise EncoderMismatchError(
            f"query encoded with {expected_config}, index built with {index.meta.config}"
        )
    terms = sorted(query_bag)
    if not terms:
        return RankedList(query_id, ())
    n = index.num_docs
    acc = np.zeros(n)
    matched = np.zeros(n, dtype=np.int32)
    for term in terms:
        hit = index.lookup(term)
        if hit is None:
            continue
        df, ords, freqs = hit
        weight = query_bag[term] * idf(n, df) ** 2
        acc[ords] += weight * np.sqrt(freqs)
        matched[ords] += 1
    candidates = np.nonzero((matched > 0) & (index.doc_lengths > 0))[0]
    if len(candidates) == 0:
        return RankedList(query_id, ())
    scores = (
        acc[candidates]
        * matched[candidates]
        / (len(terms) * np.sqrt(index.doc_lengths[candidates]))
    )
    picked = _top_k(scores, candidates, index.doc_ids, k)
    hits = tuple(
        ScoredDoc(index.doc_ids[candidates[j]], float(scores[j])) for j in picked
    )
    return RankedList(query_id, hits)


class ExactSearcher:
    """Brute-force cosine oracle over a normalized in-memory corpus.

    Reads the corpus stream once; every vector (and later every query) is
    unit-normalized, so scores are exact dot products in [-1, 1].
    """

    def __init__(self, vectors: Iterable[DenseVector]):
        ids: list[str] = []
        rows: list[np.ndarray] = []
        dim = -1
        for v in vectors:
            u = normalize(v)
            if dim < 0:
                dim = u.dim
            elif u.dim != dim:
                raise DimensionMismatchError(
                    f"vector {v.id!r} has {v.dim} dimensions, expected {dim}"
                )
            ids.append(u.id)
            rows.append(u.values)
        self.doc_ids = ids
        self.matrix = np.vstack(rows) if rows else np.empty((0, 0))

    def search(self, query: DenseVector, k: int) -> RankedList:
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self.doc_ids:
            return RankedList(query.id, ())
        q = normalize(query)
        if q.dim != self.matrix.shape[1]:
            raise DimensionMismatchError(
                f"query has {q.dim} dimensions, corpus has {self.matrix.shape[1]}"
            )
        scores = self.matrix @ q.values
        candidates = np.arange(len(self.doc_ids))
        picked = _top_k(scores, candidates, self.doc_ids, k)
        hits = tuple(ScoredDoc(self.doc_ids[j], float(scores[j])) for j in picked)
        return RankedList(query.id, hits)


def exact_search(vectors: Iterable[DenseVector], query: DenseVector, k: int) -> RankedList:
    """One-shot exact top-k over a corpus stream. See ExactSearcher."""
    return ExactSearcher(vectors).search(query, k)


def run_queries(
    index: InvertedIndex,
    queries: Iterable[DenseVector],
    k: int,
    workers: int = 1,
) -> list[RankedList]:
    """Encode and score a query batch; output order always equals input order.

    Queries are encoded with the index's own encoder configuration, so a
    mismatch cannot arise. `workers` > 1 scores queries on a thread pool;
    results are identical to the single-threaded run.
    """
    if workers < 1:
        raise ValueError("workers must be >= 1")
    config = index.meta.config
    batch = list(queries)

    def one(query: DenseVector) -> RankedList:
        bag = encode_vector(config, query)
        return score_query(index, bag, k, query_id=query.id)

    if workers == 1 or len(batch) <= 1:
        return [one(q) for q in batch]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, batch))


def write_trec_run(
    ranked_lists: Iterable[RankedList], path: str | Path, tag: str = "veclex"
) -> int:
    """Write results in TREC run format, one line per hit:

        <query id> Q0 <doc id> <rank> <score> <tag>

    Ranks start at 1 per query; scores carry six decimal places. Returns the
    number of lines written.
    """
    lines = 0
    with open(path, "w", encoding="utf-8") as f:
        for ranked in ranked_lists:
            for rank, hit in enumerate(ranked.hits, 1):
                f.write(f"{ranked.query_id} Q0 {hit.doc_id} {rank} {hit.score:.6f} {tag}\n")
                lines += 1
    return lines


def format_trec_run(ranked: RankedList, tag: str = "veclex") -> list[str]:
    """Run-format lines for one ranked list, without trailing newlines."""
    return [
        f"{ranked.query_id} Q0 {hit.doc_id} {rank} {hit.score:.6f} {tag}"
        for rank, hit in enumerate(ranked.hits, 1)
    ]
