"""FastAPI application wrapping the core retrieval package.

The service holds at most one loaded index at a time; building or loading
replaces it. A loaded index is immutable, so search requests are served
concurrently without locking. File paths in requests are resolved on the
server's filesystem: this is a workbench service, not a public API.
"""

from __future__ import annotations

import threading

import numpy as np
from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..bench import measure_qps, oracle_qrels, sweep
from ..encoders import EncoderConfig, encode_vector
from ..errors import VeclexError
from ..evaluation import evaluate, parse_metric, parse_qrels
from ..index import InvertedIndex, build_index, index_stats, read_index, write_index
from ..search import ExactSearcher, RankedList, run_queries, score_query
from ..vectors import DenseVector, read_vectors
from .schemas import (
    BatchSearchRequest,
    BenchRequest,
    BenchResultOut,
    BuildRequest,
    EvalReportOut,
    EvalRequest,
    ExactSearchRequest,
    HealthOut,
    Hit,
    IndexInfo,
    LoadRequest,
    RankedListOut,
    SearchRequest,
    SweepRequest,
    SweepRowOut,
    VectorIn,
)


def _to_vector(v: VectorIn) -> DenseVector:
    return DenseVector(v.id, np.array(v.vector, dtype=np.float64))


def _to_ranked_out(ranked: RankedList) -> RankedListOut:
    return RankedListOut(
        query_id=ranked.query_id,
        hits=[Hit(doc_id=h.doc_id, score=h.score) for h in ranked.hits],
    )


def _index_info(index: InvertedIndex) -> IndexInfo:
    stats = index_stats(index)
    return IndexInfo(
        path=str(index.path) if index.path else None,
        encoder=index.meta.config.to_dict(),
        documents=index.num_docs,
        dimension=index.meta.dimension,
        distinct_terms=stats.distinct_terms,
        total_postings=stats.total_postings,
        total_tokens=stats.total_tokens,
        bytes_on_disk=stats.bytes_on_disk,
    )


def _encoding_to_config(spec) -> EncoderConfig:
    if spec.kind == "fw":
        if spec.fw_q is None:
            raise HTTPException(status_code=422, detail="encoding kind 'fw' requires fw_q")
        return EncoderConfig.fake_words(spec.fw_q)
    if spec.lsh_b is None:
        raise HTTPException(status_code=422, detail="encoding kind 'lexlsh' requires lsh_b")
    return EncoderConfig.lexical_lsh(spec.lsh_b, decimals=spec.lsh_d, ngram=spec.lsh_n)


def create_app() -> FastAPI:
    app = FastAPI(
        title="veclex",
        version=__version__,
        description="Top-k dense vector retrieval on a classic inverted index.",
    )
    state_lock = threading.Lock()
    holder: dict[str, InvertedIndex | None] = {"index": None}

    @app.exception_handler(VeclexError)
    async def _veclex_error(_: Request, exc: VeclexError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(FileNotFoundError)
    async def _not_found(_: Request, exc: FileNotFoundError) -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": str(exc)})

    def current_index() -> InvertedIndex:
        index = holder["index"]
        if index is None:
            raise HTTPException(status_code=409, detail="no index loaded")
        return index

    @app.get("/health", response_model=HealthOut)
    def health() -> HealthOut:
        index = holder["index"]
        return HealthOut(
            status="ok",
            index_loaded=index is not None,
            index_path=str(index.path) if index is not None and index.path else None,
        )

    @app.post("/index/build", response_model=IndexInfo)
    def index_build(request: BuildRequest) -> IndexInfo:
        config = _encoding_to_config(request.encoding)
        index = build_index(read_vectors(request.vectors_path), config)
        write_index(index, request.output_dir)
        with state_lock:
            holder["index"] = index
        return _index_info(index)

    @app.post("/index/load", response_model=IndexInfo)
    def index_load(request: LoadRequest) -> IndexInfo:
        index = read_index(request.path)
        with state_lock:
            holder["index"] = index
        return _index_info(index)

    @app.get("/index", response_model=IndexInfo)
    def index_get() -> IndexInfo:
        return _index_info(current_index())

    @app.post("/search", response_model=RankedListOut)
    def search(request: SearchRequest) -> RankedListOut:
        index = current_index()
        query = _to_vector(request.query)
        bag = encode_vector(index.meta.config, query)
        ranked = score_query(index, bag, request.k, query_id=query.id)
        return _to_ranked_out(ranked)

    @app.post("/search/batch", response_model=list[RankedListOut])
    def search_batch(request: BatchSearchRequest) -> list[RankedListOut]:
        index = current_index()
        queries = [_to_vector(v) for v in request.queries]
        run = run_queries(index, queries, request.k, workers=request.threads)
        return [_to_ranked_out(r) for r in run]

    @app.post("/search/exact", response_model=list[RankedListOut])
    def search_exact(request: ExactSearchRequest) -> list[RankedListOut]:
        searcher = ExactSearcher(read_vectors(request.vectors_path))
        return [
            _to_ranked_out(searcher.search(_to_vector(v), request.k))
            for v in request.queries
        ]

    @app.post("/eval", response_model=EvalReportOut)
    def eval_run(request: EvalRequest) -> EvalReportOut:
        specs = [parse_metric(m) for m in request.metrics]
        report = evaluate(request.run_path, request.qrels_path, specs)
        return EvalReportOut(
            query_count=report.query_count,
            aggregate=report.aggregate,
            per_query=report.per_query if request.include_per_query else None,
        )

    @app.post("/bench", response_model=BenchResultOut)
    def bench(request: BenchRequest) -> BenchResultOut:
        index = current_index()
        queries = list(read_vectors(request.queries_path))
        result = measure_qps(
            index, queries, request.k, workers=request.threads, trials=request.trials
        )
        return BenchResultOut(**result.to_dict())

    @app.post("/sweep", response_model=list[SweepRowOut])
    def sweep_configs(request: SweepRequest) -> list[SweepRowOut]:
        if request.encoding == "fw":
            if not request.fw_q:
                raise HTTPException(status_code=422, detail="encoding 'fw' requires fw_q")
            configs = [EncoderConfig.fake_words(q) for q in request.fw_q]
        else:
            if not request.lsh_b:
                raise HTTPException(status_code=422, detail="encoding 'lexlsh' requires lsh_b")
            configs = [
                EncoderConfig.lexical_lsh(b, decimals=request.lsh_d, ngram=request.lsh_n)
                for b in request.lsh_b
            ]
        metrics = [parse_metric(m) for m in request.metrics]
        corpus = list(read_vectors(request.vectors_path))
        queries = list(read_vectors(request.queries_path))
        if request.qrels_path:
            qrels = parse_qrels(request.qrels_path)
        else:
            qrels = oracle_qrels(corpus, queries, depth=10)
        rows = sweep(
            corpus,
            queries,
            qrels,
            configs,
            k=request.k,
            workers=request.threads,
            trials=request.trials,
            metrics=metrics,
        )
        return [
            SweepRowOut(
                label=row.label,
                metrics=row.metrics,
                mean_qps=row.mean_qps,
                index_bytes=row.index_bytes,
            )
            for row in rows
        ]

    return app


app = create_app()
