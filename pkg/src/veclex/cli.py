"""Command line interface.

Subcommands cover the full workflow: build an index from a vector file,
search it (or search exhaustively without one), evaluate run files, measure
throughput, sweep encoder configurations, generate synthetic workloads, and
serve the HTTP API. Runtime failures print a diagnostic to stderr and exit
with status 1; usage errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bench import (
    DEFAULT_METRICS,
    format_table,
    measure_qps,
    oracle_qrels,
    planted_qrels,
    rows_to_csv,
    sweep,
    synthetic_corpus,
    synthetic_queries,
)
from .encoders import EncoderConfig
from .errors import VeclexError
from .evaluation import evaluate, parse_metric, parse_qrels
from .index import build_index, index_stats, read_index, write_index
from .search import ExactSearcher, run_queries, write_trec_run
from .vectors import read_vectors, write_vectors


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {exc}")


def _encoder_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> EncoderConfig:
    if args.encoding == "fw":
        if args.fw_q is None:
            parser.error("--encoding fw requires --fw-q")
        if args.fw_q < 2:
            parser.error("--fw-q must be >= 2")
        return EncoderConfig.fake_words(args.fw_q)
    if args.lsh_b is None:
        parser.error("--encoding lexlsh requires --lsh-b")
    return EncoderConfig.lexical_lsh(args.lsh_b, decimals=args.lsh_d, ngram=args.lsh_n)


def _add_encoding_flags(sub: argparse.ArgumentParser, plural: bool = False) -> None:
    sub.add_argument("--encoding", choices=["fw", "lexlsh"], required=True,
                     help="vector-to-terms encoding")
    if plural:
        sub.add_argument("--fw-q", type=_int_list, default=None, metavar="Q[,Q...]",
                         help="fake words quantizers, comma separated")
        sub.add_argument("--lsh-b", type=_int_list, default=None, metavar="B[,B...]",
                         help="lexical LSH bucket counts, comma separated")
    else:
        sub.add_argument("--fw-q", type=int, default=None, metavar="Q",
                         help="fake words quantizer (>= 2)")
        sub.add_argument("--lsh-b", type=_positive_int, default=None, metavar="B",
                         help="lexical LSH bucket count")
    sub.add_argument("--lsh-d", type=_positive_int, default=1, metavar="D",
                     help="decimals kept per component (default 1)")
    sub.add_argument("--lsh-n", type=_positive_int, default=2, metavar="N",
                     help="shingle size (default 2)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veclex",
        description="Top-k dense vector retrieval on a classic inverted index.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("index", help="build an index from a JSONL vector file")
    p.add_argument("--input", required=True, help="corpus vectors (JSONL)")
    _add_encoding_flags(p)
    p.add_argument("--output", required=True, help="index directory to create")

    p = subs.add_parser("search", help="run queries against an index")
    p.add_argument("--index", required=True, help="index directory")
    p.add_argument("--queries", required=True, help="query vectors (JSONL)")
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--output", required=True, help="run file to write")
    p.add_argument("--tag", default="veclex", help="run tag (last column)")

    p = subs.add_parser("search-exact", help="exhaustive exact search, no index")
    p.add_argument("--vectors", required=True, help="corpus vectors (JSONL)")
    p.add_argument("--queries", required=True, help="query vectors (JSONL)")
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--output", required=True, help="run file to write")
    p.add_argument("--tag", default="exact")

    p = subs.add_parser("eval", help="evaluate a run file against qrels")
    p.add_argument("--run", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--metrics", default="rr@10,ndcg@10,recall@1000",
                   help="comma-separated metric specs (default rr@10,ndcg@10,recall@1000)")
    p.add_argument("--per-query", action="store_true", help="include per-query values")
    p.add_argument("--output", default=None, help="write the JSON report here instead of stdout")

    p = subs.add_parser("bench", help="measure query throughput on an index")
    p.add_argument("--index", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--trials", type=_positive_int, default=3)
    p.add_argument("--output", default=None, help="write the JSON result here instead of stdout")

    p = subs.add_parser("sweep", help="benchmark a family of encoder configs")
    p.add_argument("--vectors", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", default=None,
                   help="qrels file; omitted: exact top-10 per query serves as the relevant set")
    _add_encoding_flags(p, plural=True)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--trials", type=_positive_int, default=3)
    p.add_argument("--metrics", default=",".join(DEFAULT_METRICS))
    p.add_argument("--output", required=True, help="CSV file to write")

    p = subs.add_parser("synth", help="generate a synthetic corpus and query set")
    p.add_argument("--docs", type=_positive_int, default=1000)
    p.add_argument("--dim", type=_positive_int, default=128)
    p.add_argument("--queries", type=_positive_int, default=100)
    p.add_argument("--noise", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out-vectors", required=True)
    p.add_argument("--out-queries", required=True)
    p.add_argument("--out-qrels", default=None,
                   help="also write qrels marking each query's planted neighbor")

    p = subs.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)

    return parser


def _cmd_index(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    config = _encoder_config(parser, args)
    index = build_index(read_vectors(args.input), config)
    write_index(index, args.output)
    stats = index_stats(index)
    print(json.dumps({
        "path": str(args.output),
        "encoder": config.to_dict(),
        "documents": index.num_docs,
        "dimension": index.meta.dimension,
        "distinct_terms": stats.distinct_terms,
        "total_postings": stats.total_postings,
        "total_tokens": stats.total_tokens,
        "bytes_on_disk": stats.bytes_on_disk,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    index = read_index(args.index)
    queries = list(read_vectors(args.queries))
    run = run_queries(index, queries, args.k, workers=args.threads)
    lines = write_trec_run(run, args.output, tag=args.tag)
    print(f"wrote {lines} lines for {len(queries)} queries to {args.output}", file=sys.stderr)
    return 0


def _cmd_search_exact(args: argparse.Namespace) -> int:
    searcher = ExactSearcher(read_vectors(args.vectors))
    queries = list(read_vectors(args.queries))
    run = [searcher.search(q, args.k) for q in queries]
    lines = write_trec_run(run, args.output, tag=args.tag)
    print(f"wrote {lines} lines for {len(queries)} queries to {args.output}", file=sys.stderr)
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    specs = [parse_metric(part) for part in args.metrics.split(",") if part.strip()]
    if not specs:
        raise VeclexError("no metrics requested")
    report = evaluate(args.run, args.qrels, specs)
    text = report.to_json(include_per_query=args.per_query)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    index = read_index(args.index)
    queries = list(read_vectors(args.queries))
    result = measure_qps(index, queries, args.k, workers=args.threads, trials=args.trials)
    text = json.dumps(result.to_dict(), indent=2, sort_keys=True)
    if args.output:
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)
    return 0


def _cmd_sweep(parser: argparse.ArgumentParser, args: argparse.Namespace) -> int:
    if args.encoding == "fw":
        if not args.fw_q:
            parser.error("--encoding fw requires --fw-q")
        for q in args.fw_q:
            if q < 2:
                parser.error("--fw-q values must be >= 2")
        configs = [EncoderConfig.fake_words(q) for q in args.fw_q]
    else:
        if not args.lsh_b:
            parser.error("--encoding lexlsh requires --lsh-b")
        for b in args.lsh_b:
            if b < 1:
                parser.error("--lsh-b values must be >= 1")
        configs = [
            EncoderConfig.lexical_lsh(b, decimals=args.lsh_d, ngram=args.lsh_n)
            for b in args.lsh_b
        ]
    metrics = [parse_metric(part) for part in args.metrics.split(",") if part.strip()]
    corpus = list(read_vectors(args.vectors))
    queries = list(read_vectors(args.queries))
    if args.qrels:
        qrels = parse_qrels(args.qrels)
    else:
        qrels = oracle_qrels(corpus, queries, depth=10)
    rows = sweep(corpus, queries, qrels, configs,
                 k=args.k, workers=args.threads, trials=args.trials, metrics=metrics)
    Path(args.output).write_text(rows_to_csv(rows, metrics), encoding="utf-8")
    print(format_table(rows, metrics))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    corpus = synthetic_corpus(args.docs, args.dim, seed=args.seed)
    queries, planted = synthetic_queries(corpus, args.queries, noise=args.noise, seed=args.seed + 1)
    write_vectors(args.out_vectors, corpus)
    write_vectors(args.out_queries, queries)
    if args.out_qrels:
        with open(args.out_qrels, "w", encoding="utf-8") as f:
            for qid, judged in sorted(planted_qrels(planted).items()):
                for doc_id, grade in sorted(judged.items()):
                    f.write(f"{qid} 0 {doc_id} {grade}\n")
    print(f"wrote {args.docs} vectors, {args.queries} queries", file=sys.stderr)
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "index":
            return _cmd_index(parser, args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "search-exact":
            return _cmd_search_exact(args)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "sweep":
            return _cmd_sweep(parser, args)
        if args.command == "synth":
            return _cmd_synth(args)
        if args.command == "serve":
            return _cmd_serve(args)
        parser.error(f"unknown command {args.command!r}")
    except VeclexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
