"""Throughput and size measurement, config sweeps, and synthetic workloads.

QPS timing covers query encoding, scoring, and top-k selection; building or
loading the index and parsing query files stay outside the clock. Every
measurement does one untimed warm-up pass over the full query set first.
Effectiveness numbers and index sizes are deterministic for a fixed input;
QPS naturally varies between runs and is reported per trial plus as a mean.
"""

from __future__ import annotations

import csv
import io
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .encoders import EncoderConfig
from .evaluation import MetricSpec, Qrels, evaluate_run, parse_metric
from .index import InvertedIndex, build_index, index_stats, write_index
from .search import ExactSearcher, RankedList, run_queries
from .vectors import DenseVector

DEFAULT_METRICS = ("rr@10", "ndcg@10", "recall@10")


@dataclass(frozen=True)
class BenchResult:
    trial_qps: tuple[float, ...]
    mean_qps: float
    workers: int
    query_count: int
    k: int

    def to_dict(self) -> dict:
        return {
            "trial_qps": list(self.trial_qps),
            "mean_qps": self.mean_qps,
            "workers": self.workers,
            "query_count": self.query_count,
            "k": self.k,
        }


def _timed_qps(run_once: Callable[[], object], query_count: int, trials: int) -> tuple[float, ...]:
    run_once()  # warm-up, not counted
    values = []
    for _ in range(trials):
        start = time.perf_counter()
        run_once()
        elapsed = max(time.perf_counter() - start, 1e-9)
        values.append(query_count / elapsed)
    return tuple(values)


def measure_qps(
    index: InvertedIndex,
    queries: Sequence[DenseVector],
    k: int,
    workers: int = 1,
    trials: int = 3,
) -> BenchResult:
    """Measure query throughput against an already-loaded index.

    Queries must be materialized in memory before the clock starts. Each
    trial runs the full set once; the result carries one QPS value per trial
    and their arithmetic mean.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    batch = list(queries)
    if not batch:
        raise ValueError("query set must not be empty")
    values = _timed_qps(lambda: run_queries(index, batch, k, workers), len(batch), trials)
    return BenchResult(
        trial_qps=values,
        mean_qps=float(np.mean(values)),
        workers=workers,
        query_count=len(batch),
        k=k,
    )


@dataclass(frozen=True)
class SweepRow:
    label: str
    metrics: dict[str, float | None]
    mean_qps: float
    index_bytes: int


def _run_to_mapping(run: Sequence[RankedList]) -> dict[str, list[str]]:
    return {ranked.query_id: [hit.doc_id for hit in ranked.hits] for ranked in run}


def sweep(
    corpus: Sequence[DenseVector],
    queries: Sequence[DenseVector],
    qrels: Qrels,
    configs: Sequence[EncoderConfig],
    k: int = 10,
    workers: int = 1,
    trials: int = 3,
    metrics: Sequence[MetricSpec | str] = DEFAULT_METRICS,
) -> list[SweepRow]:
    """Build, measure, and evaluate one row per config, plus an exact oracle row.

    Each index is written to a scratch directory so the size column reflects
    real serialized bytes. The oracle row reports 0 bytes: exhaustive search
    keeps no index.
    """
    specs = [spec if isinstance(spec, MetricSpec) else parse_metric(spec) for spec in metrics]
    corpus = list(corpus)
    queries = list(queries)
    rows: list[SweepRow] = []
    with tempfile.TemporaryDirectory(prefix="veclex-sweep-") as scratch:
        for position, config in enumerate(configs):
            index = build_index(corpus, config)
            write_index(index, Path(scratch) / f"idx-{position}")
            nbytes = index_stats(index).bytes_on_disk
            run = run_queries(index, queries, k, workers)
            report = evaluate_run(_run_to_mapping(run), qrels, specs)
            bench = measure_qps(index, queries, k, workers, trials)
            rows.append(
                SweepRow(
                    label=config.label(),
                    metrics=report.aggregate,
                    mean_qps=bench.mean_qps,
                    index_bytes=nbytes,
                )
            )
    searcher = ExactSearcher(corpus)

    def run_exact() -> list[RankedList]:
        return [searcher.search(q, k) for q in queries]

    exact_run = run_exact()
    report = evaluate_run(_run_to_mapping(exact_run), qrels, specs)
    qps_values = _timed_qps(run_exact, len(queries), trials)
    rows.append(
        SweepRow(
            label="exact",
            metrics=report.aggregate,
            mean_qps=float(np.mean(qps_values)),
            index_bytes=0,
        )
    )
    return rows


def rows_to_csv(rows: Sequence[SweepRow], metrics: Sequence[MetricSpec | str] = DEFAULT_METRICS) -> str:
    """Render sweep rows as CSV: label, one column per metric, qps, bytes.

    Metric cells carry six decimals so reruns over identical inputs produce
    byte-identical effectiveness columns; QPS is the only column expected to
    move between runs.
    """
    keys = [str(spec if isinstance(spec, MetricSpec) else parse_metric(spec)) for spec in metrics]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["label", *keys, "qps", "bytes"])
    for row in rows:
        cells = [row.label]
        for key in keys:
            value = row.metrics.get(key)
            cells.append("" if value is None else f"{value:.6f}")
        cells.append(f"{row.mean_qps:.2f}")
        cells.append(str(row.index_bytes))
        writer.writerow(cells)
    return buffer.getvalue()


def format_table(rows: Sequence[SweepRow], metrics: Sequence[MetricSpec | str] = DEFAULT_METRICS) -> str:
    """Aligned plain-text rendering of sweep rows for terminals."""
    keys = [str(spec if isinstance(spec, MetricSpec) else parse_metric(spec)) for spec in metrics]
    header = ["label", *keys, "qps", "bytes"]
    table = [header]
    for row in rows:
        cells = [row.label]
        for key in keys:
            value = row.metrics.get(key)
            cells.append("-" if value is None else f"{value:.4f}")
        cells.append(f"{row.mean_qps:.2f}")
        cells.append(f"{row.index_bytes:,}")
        table.append(cells)
    widths = [max(len(line[col]) for line in table) for col in range(len(header))]
    rendered = []
    for line in table:
        rendered.append("  ".join(cell.ljust(width) for cell, width in zip(line, widths)).rstrip())
    return "\n".join(rendered)


def synthetic_corpus(count: int, dim: int, seed: int = 42) -> list[DenseVector]:
    """Fixed-seed isotropic Gaussian unit vectors with ids d000000, d000001, ..."""
    if count < 1 or dim < 1:
        raise ValueError("count and dim must be >= 1")
    rng = np.random.default_rng(seed)
    matrix = rng.standard_normal((count, dim))
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)
    return [DenseVector(f"d{i:06d}", matrix[i]) for i in range(count)]


def synthetic_queries(
    corpus: Sequence[DenseVector],
    count: int,
    noise: float = 0.25,
    seed: int = 43,
) -> tuple[list[DenseVector], dict[str, str]]:
    """Perturbed copies of distinct corpus points, renormalized.

    Returns the queries plus a mapping from query id to the id of the corpus
    point it was planted on (its intended nearest neighbor).
    """
    if count < 1 or count > len(corpus):
        raise ValueError("count must be in [1, len(corpus)]")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(corpus), size=count, replace=False)
    queries: list[DenseVector] = []
    planted: dict[str, str] = {}
    for j, i in enumerate(picks.tolist()):
        source = corpus[i]
        perturbed = source.values + noise * rng.standard_normal(source.dim)
        perturbed /= np.linalg.norm(perturbed)
        qid = f"q{j:04d}"
        queries.append(DenseVector(qid, perturbed))
        planted[qid] = source.id
    return queries, planted


def planted_qrels(planted: dict[str, str]) -> Qrels:
    """Qrels marking each query's planted corpus point as relevant at grade 1."""
    return {qid: {doc_id: 1} for qid, doc_id in planted.items()}


def oracle_qrels(corpus: Sequence[DenseVector], queries: Sequence[DenseVector], depth: int = 10) -> Qrels:
    """Qrels whose relevant set is the exact top-`depth` for every query."""
    searcher = ExactSearcher(corpus)
    return {
        q.id: {hit.doc_id: 1 for hit in searcher.search(q, depth).hits} for q in queries
    }
