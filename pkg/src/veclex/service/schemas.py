"""Request and response models for the HTTP API."""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import BaseModel, Field


class VectorIn(BaseModel):
    id: str = Field(min_length=1)
    vector: list[float] = Field(min_length=1)


class EncodingSpec(BaseModel):
    """Encoder selection: kind "fw" needs fw_q, kind "lexlsh" needs lsh_b."""

    kind: Literal["fw", "lexlsh"]
    fw_q: int | None = Field(default=None, ge=2)
    lsh_b: int | None = Field(default=None, ge=1)
    lsh_d: int = Field(default=1, ge=1)
    lsh_n: int = Field(default=2, ge=1)


class BuildRequest(BaseModel):
    vectors_path: str
    output_dir: str
    encoding: EncodingSpec


class LoadRequest(BaseModel):
    path: str


class IndexInfo(BaseModel):
    path: str | None
    encoder: dict
    documents: int
    dimension: int
    distinct_terms: int
    total_postings: int
    total_tokens: int
    bytes_on_disk: int


class SearchRequest(BaseModel):
    query: VectorIn
    k: int = Field(default=10, ge=1)


class BatchSearchRequest(BaseModel):
    queries: list[VectorIn] = Field(min_length=1)
    k: int = Field(default=10, ge=1)
    threads: int = Field(default=1, ge=1)


class ExactSearchRequest(BaseModel):
    vectors_path: str
    queries: list[VectorIn] = Field(min_length=1)
    k: int = Field(default=10, ge=1)


class Hit(BaseModel):
    doc_id: str
    score: float


class RankedListOut(BaseModel):
    query_id: str
    hits: list[Hit]


class EvalRequest(BaseModel):
    run_path: str
    qrels_path: str
    metrics: list[str] = Field(default=["rr@10", "ndcg@10", "recall@1000"], min_length=1)
    include_per_query: bool = False


class EvalReportOut(BaseModel):
    query_count: int
    aggregate: dict[str, float | None]
    per_query: dict[str, dict[str, float]] | None = None


class BenchRequest(BaseModel):
    queries_path: str
    k: int = Field(default=10, ge=1)
    threads: int = Field(default=1, ge=1)
    trials: int = Field(default=3, ge=1)


class BenchResultOut(BaseModel):
    trial_qps: list[float]
    mean_qps: float
    workers: int
    query_count: int
    k: int


class SweepRequest(BaseModel):
    vectors_path: str
    queries_path: str
    qrels_path: str | None = None
    encoding: Literal["fw", "lexlsh"]
    fw_q: list[Annotated[int, Field(ge=2)]] | None = None
    lsh_b: list[Annotated[int, Field(ge=1)]] | None = None
    lsh_d: int = Field(default=1, ge=1)
    lsh_n: int = Field(default=2, ge=1)
    k: int = Field(default=10, ge=1)
    threads: int = Field(default=1, ge=1)
    trials: int = Field(default=3, ge=1)
    metrics: list[str] = Field(default=["rr@10", "ndcg@10", "recall@10"], min_length=1)


class SweepRowOut(BaseModel):
    label: str
    metrics: dict[str, float | None]
    mean_qps: float
    index_bytes: int


class HealthOut(BaseModel):
    status: str
    index_loaded: bool
    index_path: str | None
