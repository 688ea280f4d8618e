"""Single-segment immutable inverted index over encoded vectors.

On disk an index is a directory holding two files:

* ``manifest.json``: the index metadata (encoder config, corpus size,
  dimension, format version) plus summary counts, for human inspection.
* ``index.bin``: magic ``VLIX``, a little-endian u32 format version, the
  dictionary / postings / document table blocks, and a trailing CRC32 of
  everything between the version word and the checksum.

The dictionary stores terms as sorted UTF-8 strings. Postings keep document
ordinals delta-encoded with LEB128 varints, interleaved with frequencies.
Builds are deterministic: identical input streams produce byte-identical
directories.
"""

from __future__ import annotations

import json
import os
import shutil
import struct
import tempfile
import zlib
from array import array
from bisect import bisect_left
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .encoders import EncoderConfig, encode_vector
from .errors import (
    CorruptIndexError,
    DimensionMismatchError,
    DuplicateDocIdError,
    EmptyCorpusError,
    OrdinalOutOfRangeError,
)
from .vectors import DenseVector

MAGIC = b"VLIX"
FORMAT_VERSION = 1

MANIFEST_NAME = "manifest.json"
DATA_NAME = "index.bin"


@dataclass(frozen=True)
class IndexMeta:
    """Identity of an index: how it was encoded and what it covers."""

    config: EncoderConfig
    corpus_size: int
    dimension: int
    format_version: int = FORMAT_VERSION


@dataclass(frozen=True)
class DocTableEntry:
    external_id: str
    token_count: int


@dataclass(frozen=True)
class IndexStats:
    distinct_terms: int
    total_postings: int
    total_tokens: int
    bytes_on_disk: int


class InvertedIndex:
    """In-memory form of an index. Treated as immutable once constructed."""

    def __init__(
        self,
        meta: IndexMeta,
        terms: list[str],
        postings: list[tuple[np.ndarray, np.ndarray]],
        doc_ids: list[str],
        doc_lengths: np.ndarray,
        path: Path | None = None,
    ):
        self.meta = meta
        self.terms = terms
        self.postings = postings
        self.doc_ids = doc_ids
        self.doc_lengths = doc_lengths
        self.path = path

    @property
    def num_docs(self) -> int:
        return len(self.doc_ids)

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def lookup(self, term: str) -> tuple[int, np.ndarray, np.ndarray] | None:
        """Return (df, ordinals, frequencies) for `term`, or None if absent.

        Ordinals are strictly increasing; the two arrays are parallel.
        """
        i = bisect_left(self.terms, term)
        if i == len(self.terms) or self.terms[i] != term:
            return None
        ords, freqs = self.postings[i]
        return len(ords), ords, freqs

    def doc_info(self, ordinal: int) -> DocTableEntry:
        if not 0 <= ordinal < self.num_docs:
            raise OrdinalOutOfRangeError(
                f"ordinal {ordinal} outside [0, {self.num_docs})"
            )
        return DocTableEntry(self.doc_ids[ordinal], int(self.doc_lengths[ordinal]))


def build_index(vectors: Iterable[DenseVector], config: EncoderConfig) -> InvertedIndex:
    """Encode a corpus stream and invert it into a single segment.

    Document ordinals follow input order. Documents whose encoding is empty
    still occupy a doc table slot with token count zero. Raises on an empty
    stream, duplicate ids, or inconsistent dimensions.
    """
    doc_ids: list[str] = []
    doc_lengths = array("q")
    acc: dict[str, tuple[array, array]] = {}
    seen: set[str] = set()
    dimension = -1
    for ordinal, v in enumerate(vectors):
        if dimension < 0:
            dimension = v.dim
        elif v.dim != dimension:
            raise DimensionMismatchError(
                f"vector {v.id!r} has {v.dim} dimensions, expected {dimension}"
            )
        if v.id in seen:
            raise DuplicateDocIdError(f"duplicate id {v.id!r}")
        seen.add(v.id)
        bag = encode_vector(config, v)
        doc_ids.append(v.id)
        doc_lengths.append(sum(bag.values()))
        for term, freq in bag.items():
            entry = acc.get(term)
            if entry is None:
                entry = (array("i"), array("i"))
                acc[term] = entry
            entry[0].append(ordinal)
            entry[1].append(freq)
    if not doc_ids:
        raise EmptyCorpusError("no vectors in input")
    terms = sorted(acc)
    postings: list[tuple[np.ndarray, np.ndarray]] = []
    for term in terms:
        ords_arr, freqs_arr = acc[term]
        ords = np.frombuffer(ords_arr, dtype=np.int32)
        freqs = np.frombuffer(freqs_arr, dtype=np.int32)
        ords.setflags(write=False)
        freqs.setflags(write=False)
        postings.append((ords, freqs))
    lengths = np.frombuffer(doc_lengths, dtype=np.int64)
    lengths.setflags(write=False)
    meta = IndexMeta(config=config, corpus_size=len(doc_ids), dimension=dimension)
    return InvertedIndex(meta, terms, postings, doc_ids, lengths)


def _append_uvarint(out: bytearray, value: int) -> None:
    while value > 0x7F:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def _read_uvarint(buf: memoryview, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise CorruptIndexError("truncated varint")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 63:
            raise CorruptIndexError("varint overflows 64 bits")


def _serialize(index: InvertedIndex) -> bytes:
    dict_blob = bytearray()
    postings_blob = bytearray()
    append = postings_blob.append
    for term, (ords, freqs) in zip(index.terms, index.postings):
        start = len(postings_blob)
        deltas = np.empty(len(ords), dtype=np.int64)
        if len(ords):
            deltas[0] = ords[0]
            np.subtract(ords[1:], ords[:-1], out=deltas[1:])
        for value, freq in zip(deltas.tolist(), freqs.tolist()):
            while value > 0x7F:
                append((value & 0x7F) | 0x80)
                value >>= 7
            append(value)
            while freq > 0x7F:
                append((freq & 0x7F) | 0x80)
                freq >>= 7
            append(freq)
        term_bytes = term.encode("utf-8")
        _append_uvarint(dict_blob, len(term_bytes))
        dict_blob += term_bytes
        _append_uvarint(dict_blob, len(ords))
        _append_uvarint(dict_blob, len(postings_blob) - start)
    doc_blob = bytearray()
    for doc_id, length in zip(index.doc_ids, index.doc_lengths.tolist()):
        id_bytes = doc_id.encode("utf-8")
        _append_uvarint(doc_blob, len(id_bytes))
        doc_blob += id_bytes
        _append_uvarint(doc_blob, length)
    payload = bytearray()
    payload += struct.pack("<I", len(index.terms))
    payload += dict_blob
    payload += struct.pack("<I", len(postings_blob))
    payload += postings_blob
    payload += struct.pack("<I", len(index.doc_ids))
    payload += doc_blob
    crc = zlib.crc32(payload)
    return MAGIC + struct.pack("<I", FORMAT_VERSION) + bytes(payload) + struct.pack("<I", crc)


def _manifest_dict(index: InvertedIndex) -> dict:
    total_postings = sum(len(ords) for ords, _ in index.postings)
    return {
        "format": "veclex-inverted-index",
        "format_version": index.meta.format_version,
        "encoder": index.meta.config.to_dict(),
        "corpus_size": index.meta.corpus_size,
        "dimension": index.meta.dimension,
        "distinct_terms": index.num_terms,
        "total_postings": total_postings,
        "total_tokens": int(index.doc_lengths.sum()),
    }


def write_index(index: InvertedIndex, directory: str | Path) -> Path:
    """Persist the index to `directory`, replacing any previous content.

    Files are staged in a temporary sibling directory and moved into place,
    so a failed write never leaves a partial index behind.
    """
    directory = Path(directory)
    directory.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=directory.parent))
    try:
        manifest = json.dumps(_manifest_dict(index), indent=2, sort_keys=True) + "\n"
        (staging / MANIFEST_NAME).write_text(manifest, encoding="utf-8")
        (staging / DATA_NAME).write_bytes(_serialize(index))
        if directory.exists():
            shutil.rmtree(directory)
        os.replace(staging, directory)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    index.path = directory
    return directory


def read_index(directory: str | Path) -> InvertedIndex:
    """Load an index directory.

    Raises FileNotFoundError when the directory does not exist, and
    CorruptIndexError when it exists but its content is invalid.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"no index directory at {directory}")
    manifest_path = directory / MANIFEST_NAME
    data_path = directory / DATA_NAME
    if not manifest_path.is_file():
        raise CorruptIndexError(f"missing index manifest {manifest_path}")
    if not data_path.is_file():
        raise CorruptIndexError(f"missing index data file {data_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        config = EncoderConfig.from_dict(manifest["encoder"])
        meta = IndexMeta(
            config=config,
            corpus_size=int(manifest["corpus_size"]),
            dimension=int(manifest["dimension"]),
            format_version=int(manifest["format_version"]),
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise CorruptIndexError(f"invalid manifest: {exc}") from exc
    if meta.format_version != FORMAT_VERSION:
        raise CorruptIndexError(
            f"unsupported format version {meta.format_version}, expected {FORMAT_VERSION}"
        )
    raw = data_path.read_bytes()
    if len(raw) < 12 or raw[:4] != MAGIC:
        raise CorruptIndexError("bad magic")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != FORMAT_VERSION:
        raise CorruptIndexError(f"unsupported format version {version} in data file")
    payload = memoryview(raw)[8:-4]
    (stored_crc,) = struct.unpack_from("<I", raw, len(raw) - 4)
    if zlib.crc32(payload) != stored_crc:
        raise CorruptIndexError("checksum mismatch")
    try:
        index = _parse_payload(payload, meta)
    except (struct.error, UnicodeDecodeError) as exc:
        raise CorruptIndexError(f"invalid index data: {exc}") from exc
    index.path = directory
    return index


def _parse_payload(payload: memoryview, meta: IndexMeta) -> InvertedIndex:
    pos = 0
    (term_count,) = struct.unpack_from("<I", payload, pos)
    pos += 4
    terms: list[str] = []
    dfs: list[int] = []
    lengths: list[int] = []
    for _ in range(term_count):
        n, pos = _read_uvarint(payload, pos)
        if pos + n > len(payload):
            raise CorruptIndexError("truncated dictionary block")
        terms.append(bytes(payload[pos : pos + n]).decode("utf-8"))
        pos += n
        df, pos = _read_uvarint(payload, pos)
        nbytes, pos = _read_uvarint(payload, pos)
        dfs.append(df)
        lengths.append(nbytes)
    if terms != sorted(terms):
        raise CorruptIndexError("dictionary terms not sorted")
    (postings_nbytes,) = struct.unpack_from("<I", payload, pos)
    pos += 4
    if postings_nbytes != sum(lengths):
        raise CorruptIndexError("postings block size disagrees with dictionary")
    if pos + postings_nbytes > len(payload):
        raise CorruptIndexError("truncated postings block")
    postings: list[tuple[np.ndarray, np.ndarray]] = []
    for df, nbytes in zip(dfs, lengths):
        end = pos + nbytes
        ords = array("i")
        freqs = array("i")
        ordinal = -1
        while pos < end:
            delta, pos = _read_uvarint(payload, pos)
            freq, pos = _read_uvarint(payload, pos)
            if ordinal < 0:
                ordinal = delta
            else:
                if delta < 1:
                    raise CorruptIndexError("non-increasing ordinals in postings")
                ordinal += delta
            if ordinal >= meta.corpus_size:
                raise CorruptIndexError("posting ordinal beyond corpus size")
            if freq < 1:
                raise CorruptIndexError("posting frequency below 1")
            ords.append(ordinal)
            freqs.append(freq)
        if pos != end:
            raise CorruptIndexError("postings entry overruns its declared length")
        if len(ords) != df:
            raise CorruptIndexError("document frequency disagrees with postings")
        a = np.frombuffer(ords, dtype=np.int32) if len(ords) else np.empty(0, np.int32)
        b = np.frombuffer(freqs, dtype=np.int32) if len(freqs) else np.empty(0, np.int32)
        a.setflags(write=False)
        b.setflags(write=False)
        postings.append((a, b))
    (doc_count,) = struct.unpack_from("<I", payload, pos)
    pos += 4
    if doc_count != meta.corpus_size:
        raise CorruptIndexError("document table size disagrees with manifest")
    doc_ids: list[str] = []
    doc_lengths = array("q")
    for _ in range(doc_count):
        n, pos = _read_uvarint(payload, pos)
        if pos + n > len(payload):
            raise CorruptIndexError("truncated document table")
        doc_ids.append(bytes(payload[pos : pos + n]).decode("utf-8"))
        pos += n
        token_count, pos = _read_uvarint(payload, pos)
        doc_lengths.append(token_count)
    if pos != len(payload):
        raise CorruptIndexError("trailing bytes after document table")
    lengths_arr = (
        np.frombuffer(doc_lengths, dtype=np.int64) if len(doc_lengths) else np.empty(0, np.int64)
    )
    lengths_arr.setflags(write=False)
    return InvertedIndex(meta, terms, postings, doc_ids, lengths_arr)


def index_stats(index: InvertedIndex) -> IndexStats:
    """Summary counts; bytes on disk is 0 for an index never written or loaded."""
    nbytes = 0
    if index.path is not None and index.path.is_dir():
        nbytes = sum(f.stat().st_size for f in index.path.iterdir() if f.is_file())
    return IndexStats(
        distinct_terms=index.num_terms,
        total_postings=sum(len(ords) for ords, _ in index.postings),
        total_tokens=int(index.doc_lengths.sum()),
        bytes_on_disk=nbytes,
    )
