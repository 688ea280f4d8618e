"""veclex: top-k dense vector retrieval on a classic inverted index.

Dense vectors are translated into synthetic term bags (frequency-quantized
"fake words" or min-hashed "lexical LSH" sketches), indexed by an ordinary
single-segment inverted index, and searched with a classic tf-idf scorer.
An exhaustive exact-search oracle, TREC-style evaluation, and a throughput /
size benchmark harness round out the toolkit.
"""

from .bench import (
    DEFAULT_METRICS,
    BenchResult,
    SweepRow,
    format_table,
    measure_qps,
    oracle_qrels,
    planted_qrels,
    rows_to_csv,
    sweep,
    synthetic_corpus,
    synthetic_queries,
)
from .encoders import (
    FAKE_WORDS,
    LEXICAL_LSH,
    EncoderConfig,
    TermBag,
    encode_fake_words,
    encode_lexical_lsh,
    encode_vector,
    lex_tokens,
    minhash_signature,
    shingle,
    stable_hash64,
)
from .errors import (
    CorruptIndexError,
    DimensionMismatchError,
    DuplicateDocIdError,
    DuplicatePairError,
    EmptyCorpusError,
    EmptyInputError,
    EncoderMismatchError,
    NonFiniteError,
    NoRelevantDocsError,
    OrdinalOutOfRangeError,
    ParseError,
    UnknownMetricError,
    VeclexError,
    ZeroVectorError,
)
from .evaluation import (
    EvalReport,
    MetricSpec,
    Qrels,
    evaluate,
    evaluate_run,
    ndcg_at_k,
    parse_metric,
    parse_qrels,
    parse_run,
    recall_at_k,
    rr_at_k,
)
from .index import (
    DocTableEntry,
    IndexMeta,
    IndexStats,
    InvertedIndex,
    build_index,
    index_stats,
    read_index,
    write_index,
)
from .search import (
    ExactSearcher,
    RankedList,
    ScoredDoc,
    exact_search,
    format_trec_run,
    idf,
    run_queries,
    score_query,
    write_trec_run,
)
from .vectors import (
    DenseVector,
    UnitVector,
    dot,
    normalize,
    quantization_error_bound,
    quantize_fw,
    quantized_dot_estimate,
    read_vectors,
    write_vectors,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
