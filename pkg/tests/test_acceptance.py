"""Acceptance suite: one test per release criterion.

Each test is numbered and self-contained, builds everything it needs from
fixed seeds, and enforces its own wall-clock budget where one applies. Run
with -v to get one PASSED/FAILED line per criterion.
"""

import math
import time

import numpy as np
import pytest

from oracles import naive_scores, quadratic_exact, reference_eval

from veclex import (
    DenseVector,
    EncoderConfig,
    ExactSearcher,
    build_index,
    dot,
    encode_vector,
    evaluate,
    evaluate_run,
    index_stats,
    measure_qps,
    ndcg_at_k,
    normalize,
    oracle_qrels,
    quantized_dot_estimate,
    read_index,
    recall_at_k,
    rows_to_csv,
    rr_at_k,
    run_queries,
    score_query,
    sweep,
    synthetic_corpus,
    synthetic_queries,
    write_index,
    write_trec_run,
)


def _run_to_map(run):
    return {ranked.query_id: [hit.doc_id for hit in ranked.hits] for ranked in run}


def test_criterion_1_quantization_error_bound():
    # 1,000 fixed-seed nonnegative unit vector pairs, m=128; for every
    # Q in {10, 20, 40, 80} the estimate stays within
    # (||a||_1 + ||b||_1)/Q + m/Q^2 of the true dot product. Zero violations.
    started = time.perf_counter()
    rng = np.random.default_rng(1001)
    m = 128
    pairs = []
    for i in range(1000):
        a = normalize(DenseVector(f"a{i}", np.abs(rng.standard_normal(m))))
        b = normalize(DenseVector(f"b{i}", np.abs(rng.standard_normal(m))))
        pairs.append((a, b))
    violations = 0
    for quantizer in (10, 20, 40, 80):
        for a, b in pairs:
            estimate = quantized_dot_estimate(a, b, quantizer)
            truth = dot(a, b)
            bound = (
                float(np.abs(a.values).sum() + np.abs(b.values).sum()) / quantizer
                + m / quantizer**2
            )
            if abs(estimate - truth) > bound:
                violations += 1
    elapsed = time.perf_counter() - started
    assert violations == 0
    assert elapsed < 5.0, f"criterion 1 took {elapsed:.2f}s, budget 5s"
    print("criterion 1 (quantization error bound): PASS")


def test_criterion_2_exact_search_oracle_equivalence():
    # Exact search's top-10 matches an independent pure-Python quadratic
    # scan, ids and order, on 1,000 random 16-dim unit vectors, 50 queries.
    started = time.perf_counter()
    corpus = synthetic_corpus(1000, 16, seed=1002)
    rng = np.random.default_rng(1003)
    raw_corpus = [(v.id, v.values.tolist()) for v in corpus]
    searcher = ExactSearcher(corpus)
    for i in range(50):
        values = rng.standard_normal(16)
        query = DenseVector(f"q{i}", values / np.linalg.norm(values))
        got = searcher.search(query, 10)
        want = quadratic_exact(raw_corpus, query.values.tolist(), 10)
        assert [h.doc_id for h in got.hits] == [doc_id for doc_id, _ in want]
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"criterion 2 took {elapsed:.2f}s, budget 5s"
    print("criterion 2 (exact search oracle equivalence): PASS")


def test_criterion_3_scorer_equivalence():
    # On 20 random corpora of at most 50 docs encoded with fake words Q=20,
    # the index scorer agrees with a naive reference scorer implementing the
    # same formula: scores within 1e-9, identical order.
    started = time.perf_counter()
    rng = np.random.default_rng(1004)
    config = EncoderConfig.fake_words(20)
    for trial in range(20):
        count = int(rng.integers(10, 51))
        dim = int(rng.integers(8, 33))
        corpus = [
            DenseVector(f"d{i:03d}", rng.standard_normal(dim)) for i in range(count)
        ]
        index = build_index(corpus, config)
        bags = {v.id: encode_vector(config, v) for v in corpus}
        for j in range(3):
            query = DenseVector(f"q{j}", rng.standard_normal(dim))
            bag = encode_vector(config, query)
            got = score_query(index, bag, k=count)
            want = naive_scores(bags, bag, k=count)
            assert [h.doc_id for h in got.hits] == [doc_id for doc_id, _ in want]
            for hit, (_, score) in zip(got.hits, want):
                assert abs(hit.score - score) <= 1e-9
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"criterion 3 took {elapsed:.2f}s, budget 10s"
    print("criterion 3 (scorer equivalence): PASS")


def test_criterion_4_quality_trend_with_quantizer():
    # Synthetic 10,000-vector corpus (m=128, fixed seed), 100 planted
    # queries; recall@10 against the exact oracle rises with Q: strictly
    # better by more than 0.1 from Q=10 to Q=60, and never drops by more
    # than 0.02 between consecutive steps.
    started = time.perf_counter()
    corpus = synthetic_corpus(10_000, 128, seed=42)
    queries, _ = synthetic_queries(corpus, 100, noise=0.25, seed=43)
    qrels = oracle_qrels(corpus, queries, depth=10)
    recalls = {}
    for quantizer in (10, 20, 40, 60):
        index = build_index(corpus, EncoderConfig.fake_words(quantizer))
        run = run_queries(index, queries, k=10)
        report = evaluate_run(_run_to_map(run), qrels, ["recall@10"])
        recalls[quantizer] = report.aggregate["recall@10"]
    elapsed = time.perf_counter() - started
    assert recalls[60] > recalls[10] + 0.1, f"recalls: {recalls}"
    steps = [(10, 20), (20, 40), (40, 60)]
    for low, high in steps:
        assert recalls[high] >= recalls[low] - 0.02, f"recalls: {recalls}"
    assert elapsed < 120.0, f"criterion 4 took {elapsed:.2f}s, budget 120s"
    print(f"criterion 4 (quality trend, recall@10 {recalls}): PASS")


def test_criterion_5_index_size_trend(tmp_path):
    # On-disk size grows strictly with the quantizer for fake words and with
    # the bucket count for lexical LSH, on the same 10,000-vector corpus.
    started = time.perf_counter()
    corpus = synthetic_corpus(10_000, 128, seed=42)
    fw_bytes = []
    for quantizer in (10, 20, 40, 60):
        index = build_index(corpus, EncoderConfig.fake_words(quantizer))
        write_index(index, tmp_path / f"fw-{quantizer}")
        fw_bytes.append(index_stats(index).bytes_on_disk)
    lsh_bytes = []
    for buckets in (100, 200, 400):
        index = build_index(corpus, EncoderConfig.lexical_lsh(buckets))
        write_index(index, tmp_path / f"lsh-{buckets}")
        lsh_bytes.append(index_stats(index).bytes_on_disk)
    elapsed = time.perf_counter() - started
    assert all(a < b for a, b in zip(fw_bytes, fw_bytes[1:])), f"fw bytes: {fw_bytes}"
    assert all(a < b for a, b in zip(lsh_bytes, lsh_bytes[1:])), f"lsh bytes: {lsh_bytes}"
    assert elapsed < 120.0, f"criterion 5 took {elapsed:.2f}s, budget 120s"
    print(f"criterion 5 (size trend, fw {fw_bytes}, lexlsh {lsh_bytes}): PASS")


def test_criterion_6_lexlsh_structural_properties():
    # With b=400 every document encodes to exactly 400 signature terms,
    # identical vectors encode identically, and on a 1,000-doc well-separated
    # corpus every document answers its own vector at rank 1.
    started = time.perf_counter()
    rng = np.random.default_rng(4242)
    dim, count, buckets = 512, 1000, 400
    raw = rng.standard_normal((count, dim))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    gram = np.abs(raw @ raw.T)
    np.fill_diagonal(gram, 0.0)
    assert gram.max() < 0.3, "precondition: corpus must be well separated"
    vectors = [DenseVector(f"d{i:04d}", raw[i]) for i in range(count)]
    config = EncoderConfig.lexical_lsh(buckets)

    for v in vectors[:100]:
        bag = encode_vector(config, v)
        assert len(bag) == buckets
        assert set(bag.values()) == {1}
    twin = DenseVector("twin", vectors[0].values.copy())
    assert encode_vector(config, twin) == encode_vector(config, vectors[0])

    index = build_index(vectors, config)
    results = run_queries(index, vectors, k=1)
    for v, ranked in zip(vectors, results):
        assert ranked.hits[0].doc_id == v.id
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"criterion 6 took {elapsed:.2f}s, budget 30s"
    print("criterion 6 (lexlsh structural properties): PASS")


def test_criterion_7_persistence_and_determinism(tmp_path):
    # Searching a written-and-reloaded index reproduces the in-memory run
    # file byte for byte; two builds of the same input are byte-identical on
    # disk; thread count never changes the run file.
    corpus = synthetic_corpus(500, 32, seed=1005)
    queries, _ = synthetic_queries(corpus, 40, noise=0.3, seed=1006)
    config = EncoderConfig.fake_words(20)

    index = build_index(corpus, config)
    memory_run = tmp_path / "memory.run"
    write_trec_run(run_queries(index, queries, k=10), memory_run)

    write_index(index, tmp_path / "idx-a")
    reloaded = read_index(tmp_path / "idx-a")
    disk_run = tmp_path / "disk.run"
    write_trec_run(run_queries(reloaded, queries, k=10), disk_run)
    assert memory_run.read_bytes() == disk_run.read_bytes()

    write_index(build_index(corpus, config), tmp_path / "idx-b")
    for name in ("index.bin", "manifest.json"):
        assert (tmp_path / "idx-a" / name).read_bytes() == (
            tmp_path / "idx-b" / name
        ).read_bytes()

    threaded_run = tmp_path / "threaded.run"
    write_trec_run(run_queries(reloaded, queries, k=10, workers=16), threaded_run)
    assert threaded_run.read_bytes() == disk_run.read_bytes()
    print("criterion 7 (persistence and determinism): PASS")


MINIATURE_RUN = """\
q1 Q0 d3 1 0.900000 mini
q1 Q0 d1 2 0.800000 mini
q1 Q0 d2 3 0.700000 mini
q2 Q0 d4 1 0.900000 mini
q2 Q0 d9 2 0.800000 mini
q2 Q0 d1 3 0.700000 mini
q3 Q0 d6 1 0.900000 mini
q3 Q0 d7 2 0.800000 mini
q4 Q0 d8 1 0.900000 mini
q4 Q0 d6 2 0.800000 mini
q4 Q0 d5 3 0.700000 mini
q4 Q0 d7 4 0.600000 mini
q5 Q0 d2 1 0.900000 mini
q6 Q0 d1 1 0.900000 mini
"""

MINIATURE_QRELS = """\
q1 0 d1 2
q1 0 d2 1
q1 0 d3 0
q2 0 d1 1
q2 0 d4 2
q3 0 d5 1
q4 0 d6 3
q4 0 d7 2
q4 0 d8 1
q5 0 d2 1
"""


def test_criterion_8_metric_correctness(tmp_path):
    # Hand-computed unit cases to 1e-6, then a frozen five-query miniature
    # whose aggregates match an independent reference evaluator to 1e-4.
    assert rr_at_k(["d1", "d2"], {"d1": 1}, 10) == 1.0
    assert rr_at_k(["x", "y", "d1"], {"d1": 2}, 10) == pytest.approx(1 / 3, abs=1e-6)
    assert rr_at_k(["x", "y", "d1"], {"d1": 1}, 2) == 0.0
    assert recall_at_k(["d1", "x"], {"d1": 1, "d2": 1}, 10) == pytest.approx(0.5, abs=1e-6)
    assert recall_at_k(["d2"], {"d1": 1, "d2": 2}, 10, threshold=2) == 1.0
    # nDCG of ranking [a, x, b] with grades a=3, b=2: 4.0 / (3 + 2/log2(3)).
    value = ndcg_at_k(["a", "x", "b"], {"a": 3, "b": 2}, 10)
    assert value == pytest.approx(0.9386, abs=5e-5)
    assert value == pytest.approx(4.0 / (3.0 + 2.0 / math.log2(3.0)), abs=1e-6)

    run_path = tmp_path / "mini.run"
    qrels_path = tmp_path / "mini.qrels"
    run_path.write_text(MINIATURE_RUN, encoding="utf-8")
    qrels_path.write_text(MINIATURE_QRELS, encoding="utf-8")

    report = evaluate(run_path, qrels_path, ["rr@10", "ndcg@10", "recall@10"])
    assert report.query_count == 5
    assert report.aggregate["rr@10"] == pytest.approx(0.7, abs=1e-12)
    assert report.aggregate["recall@10"] == pytest.approx(0.8, abs=1e-12)
    log3 = math.log2(3.0)
    expected_ndcg = (
        ((2 / log3 + 1 / 2) / (2 + 1 / log3))          # q1: [d3, d1, d2]
        + (2.5 / (2 + 1 / log3))                        # q2: [d4, d9, d1]
        + 0.0                                           # q3: nothing found
        + ((1 + 3 / log3 + 2 / math.log2(5.0))          # q4: [d8, d6, d5, d7]
           / (3 + 2 / log3 + 1 / 2))
        + 1.0                                           # q5: [d2]
    ) / 5
    assert report.aggregate["ndcg@10"] == pytest.approx(expected_ndcg, abs=1e-6)

    ref_rr, ref_ndcg, ref_recall = reference_eval(
        MINIATURE_RUN.splitlines(), MINIATURE_QRELS.splitlines(), k_recall=10
    )
    assert report.aggregate["rr@10"] == pytest.approx(ref_rr, abs=1e-4)
    assert report.aggregate["ndcg@10"] == pytest.approx(ref_ndcg, abs=1e-4)
    assert report.aggregate["recall@10"] == pytest.approx(ref_recall, abs=1e-4)
    print("criterion 8 (metric correctness): PASS")


def test_criterion_9_bench_harness_contract():
    # measure_qps with trials=3 reports exactly three trial values plus
    # their arithmetic mean; sweep CSV effectiveness columns are
    # bit-identical across reruns.
    corpus = synthetic_corpus(300, 32, seed=1007)
    queries, _ = synthetic_queries(corpus, 20, noise=0.25, seed=1008)
    index = build_index(corpus, EncoderConfig.fake_words(20))
    result = measure_qps(index, queries, k=10, trials=3)
    assert len(result.trial_qps) == 3
    assert result.mean_qps == pytest.approx(sum(result.trial_qps) / 3)

    qrels = oracle_qrels(corpus, queries, depth=10)
    configs = [EncoderConfig.fake_words(10), EncoderConfig.lexical_lsh(50)]

    def effectiveness_columns(csv_text):
        rows = []
        for line in csv_text.strip().split("\n"):
            cells = line.split(",")
            rows.append(cells[:-2] + cells[-1:])  # drop only the qps column
        return rows

    first = rows_to_csv(sweep(corpus, queries, qrels, configs, k=10, trials=1))
    second = rows_to_csv(sweep(corpus, queries, qrels, configs, k=10, trials=1))
    assert effectiveness_columns(first) == effectiveness_columns(second)
    print("criterion 9 (bench harness contract): PASS")
