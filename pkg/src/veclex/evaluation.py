"""TREC-style effectiveness evaluation: qrels, run files, and ranking metrics.

Metrics are selected with compact spec strings: ``rr@10``, ``ndcg@10``,
``recall@1000``. Reciprocal rank and recall accept an optional relevance
threshold suffix, e.g. ``recall@100:2`` counts only documents judged with
grade >= 2 as relevant; the default threshold is 1. nDCG uses every graded
judgment with linear gain and takes no threshold.

Aggregates are unweighted means over the queries that appear in both the run
and the qrels. Queries for which a metric is undefined (no relevant documents
for recall, an all-zero ideal ranking for nDCG) are left out of that metric's
mean.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .errors import (
    DuplicatePairError,
    NoRelevantDocsError,
    ParseError,
    UnknownMetricError,
)

Qrels = dict[str, dict[str, int]]

_METRIC_NAMES = ("rr", "ndcg", "recall")


@dataclass(frozen=True)
class MetricSpec:
    name: str
    k: int
    threshold: int = 1

    def __str__(self) -> str:
        base = f"{self.name}@{self.k}"
        if self.name != "ndcg" and self.threshold != 1:
            return f"{base}:{self.threshold}"
        return base


def parse_metric(spec: str) -> MetricSpec:
    """Parse "name@k" or "name@k:threshold" into a MetricSpec."""
    text = spec.strip().lower()
    name, sep, rest = text.partition("@")
    if not sep or name not in _METRIC_NAMES:
        raise UnknownMetricError(f"unknown metric spec {spec!r}")
    rest, tsep, tpart = rest.partition(":")
    try:
        k = int(rest)
    except ValueError as exc:
        raise UnknownMetricError(f"bad cutoff in metric spec {spec!r}") from exc
    if k < 1:
        raise UnknownMetricError(f"cutoff must be >= 1 in {spec!r}")
    threshold = 1
    if tsep:
        if name == "ndcg":
            raise UnknownMetricError("ndcg takes no relevance threshold")
        try:
            threshold = int(tpart)
        except ValueError as exc:
            raise UnknownMetricError(f"bad threshold in metric spec {spec!r}") from exc
        if threshold < 1:
            raise UnknownMetricError(f"threshold must be >= 1 in {spec!r}")
    return MetricSpec(name, k, threshold)


def parse_qrels(path: str | Path) -> Qrels:
    """Read whitespace-separated qrels: <qid> <ignored> <docid> <grade>.

    Grades are integers >= 0; a repeated (query, document) pair is an error.
    """
    qrels: Qrels = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 4:
                raise ParseError(f"expected 4 fields, found {len(fields)}", lineno)
            qid, _, doc_id, grade_text = fields
            try:
                grade = int(grade_text)
            except ValueError as exc:
                raise ParseError(f"non-integer grade {grade_text!r}", lineno) from exc
            if grade < 0:
                raise ParseError(f"negative grade {grade}", lineno)
            by_doc = qrels.setdefault(qid, {})
            if doc_id in by_doc:
                raise DuplicatePairError(
                    f"line {lineno}: duplicate judgment for ({qid!r}, {doc_id!r})"
                )
            by_doc[doc_id] = grade
    return qrels


def parse_run(path: str | Path) -> dict[str, list[str]]:
    """Read a TREC run file into query id -> doc ids ordered by the rank column."""
    raw: dict[str, list[tuple[int, str]]] = {}
    seen: set[tuple[str, str]] = set()
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 6:
                raise ParseError(f"expected 6 fields, found {len(fields)}", lineno)
            qid, _, doc_id, rank_text, score_text, _ = fields
            try:
                rank = int(rank_text)
                float(score_text)
            except ValueError as exc:
                raise ParseError(f"bad rank or score: {exc}", lineno) from exc
            if rank < 1:
                raise ParseError(f"rank {rank} below 1", lineno)
            if (qid, doc_id) in seen:
                raise ParseError(f"duplicate document {doc_id!r} for query {qid!r}", lineno)
            seen.add((qid, doc_id))
            raw.setdefault(qid, []).append((rank, doc_id))
    return {
        qid: [doc_id for _, doc_id in sorted(entries)] for qid, entries in raw.items()
    }


def rr_at_k(ranking: Sequence[str], judgments: Mapping[str, int], k: int, threshold: int = 1) -> float:
    """Reciprocal rank of the first document judged at or above `threshold`.

    Zero when no such document appears in the top k.
    """
    for position, doc_id in enumerate(ranking[:k], 1):
        if judgments.get(doc_id, 0) >= threshold:
            return 1.0 / position
    return 0.0


def ndcg_at_k(ranking: Sequence[str], judgments: Mapping[str, int], k: int) -> float | None:
    """nDCG with linear gain: DCG = sum grade_i / log2(i + 1) over the top k.

    The ideal ranking permutes the judged documents by descending grade.
    Returns None when every judged grade is zero, since no ideal ordering has
    any gain to normalize against.
    """
    dcg = 0.0
    for position, doc_id in enumerate(ranking[:k], 1):
        grade = judgments.get(doc_id, 0)
        if grade:
            dcg += grade / math.log2(position + 1)
    ideal = sorted((g for g in judgments.values() if g > 0), reverse=True)
    idcg = sum(g / math.log2(i + 1) for i, g in enumerate(ideal[:k], 1))
    if idcg == 0.0:
        return None
    return dcg / idcg


def recall_at_k(ranking: Sequence[str], judgments: Mapping[str, int], k: int, threshold: int = 1) -> float:
    """Fraction of relevant documents (grade >= threshold) found in the top k.

    Raises NoRelevantDocsError when the query has no relevant documents at
    this threshold; aggregation treats that query as not evaluable.
    """
    relevant = {doc_id for doc_id, grade in judgments.items() if grade >= threshold}
    if not relevant:
        raise NoRelevantDocsError("query has no documents at or above the threshold")
    found = sum(1 for doc_id in ranking[:k] if doc_id in relevant)
    return found / len(relevant)


@dataclass(frozen=True)
class EvalReport:
    """Per-query metric values and their unweighted means.

    `per_query` maps query id -> metric spec -> value; undefined values are
    absent. `aggregate` maps metric spec -> mean, or None if the metric was
    defined for no query. `query_count` is the number of queries shared by
    the run and the qrels.
    """

    aggregate: dict[str, float | None]
    per_query: dict[str, dict[str, float]]
    query_count: int

    def to_dict(self, include_per_query: bool = True) -> dict:
        out: dict = {"query_count": self.query_count, "aggregate": self.aggregate}
        if include_per_query:
            out["per_query"] = self.per_query
        return out

    def to_json(self, include_per_query: bool = True) -> str:
        return json.dumps(self.to_dict(include_per_query), indent=2, sort_keys=True)


def evaluate_run(
    run: Mapping[str, Sequence[str]], qrels: Qrels, specs: Sequence[MetricSpec | str]
) -> EvalReport:
    """Evaluate in-memory rankings. Run queries missing from the qrels are skipped."""
    parsed = [spec if isinstance(spec, MetricSpec) else parse_metric(spec) for spec in specs]
    per_query: dict[str, dict[str, float]] = {}
    sums: dict[str, float] = {str(spec): 0.0 for spec in parsed}
    counts: dict[str, int] = {str(spec): 0 for spec in parsed}
    shared = [qid for qid in run if qid in qrels]
    for qid in shared:
        ranking = run[qid]
        judgments = qrels[qid]
        row: dict[str, float] = {}
        for spec in parsed:
            key = str(spec)
            if spec.name == "rr":
                value = rr_at_k(ranking, judgments, spec.k, spec.threshold)
            elif spec.name == "ndcg":
                maybe = ndcg_at_k(ranking, judgments, spec.k)
                if maybe is None:
                    continue
                value = maybe
            else:
                try:
                    value = recall_at_k(ranking, judgments, spec.k, spec.threshold)
                except NoRelevantDocsError:
                    continue
            row[key] = value
            sums[key] += value
            counts[key] += 1
        per_query[qid] = row
    aggregate = {
        key: (sums[key] / counts[key] if counts[key] else None) for key in sums
    }
    return EvalReport(aggregate=aggregate, per_query=per_query, query_count=len(shared))


def evaluate(
    run_path: str | Path, qrels_path: str | Path, specs: Sequence[MetricSpec | str]
) -> EvalReport:
    """Evaluate a run file against a qrels file."""
    return evaluate_run(parse_run(run_path), parse_qrels(qrels_path), specs)
