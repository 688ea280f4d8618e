"""Encoders: fake words, lexical tokens, shingles, hashing, min-hash signatures."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from veclex.encoders import (
    EncoderConfig,
    encode_fake_words,
    encode_lexical_lsh,
    encode_vector,
    lex_tokens,
    minhash_signature,
    shingle,
    stable_hash64,
)
from veclex.errors import EmptyInputError
from veclex.vectors import DenseVector, normalize, quantize_fw


def vec(*values, id="v"):
    return DenseVector(id, np.array(values, dtype=np.float64))


class TestEncoderConfig:
    def test_fake_words_needs_quantizer_at_least_two(self):
        with pytest.raises(ValueError):
            EncoderConfig.fake_words(1)
        assert EncoderConfig.fake_words(2).quantizer == 2

    def test_lexlsh_defaults(self):
        config = EncoderConfig.lexical_lsh(400)
        assert (config.decimals, config.ngram, config.buckets) == (1, 2, 400)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            EncoderConfig.lexical_lsh(0)
        with pytest.raises(ValueError):
            EncoderConfig.lexical_lsh(10, decimals=0)
        with pytest.raises(ValueError):
            EncoderConfig.lexical_lsh(10, ngram=0)
        with pytest.raises(ValueError):
            EncoderConfig(kind="nope")

    def test_dict_roundtrip(self):
        for config in (EncoderConfig.fake_words(40), EncoderConfig.lexical_lsh(100, 2, 3)):
            assert EncoderConfig.from_dict(config.to_dict()) == config

    def test_equality_distinguishes_parameters(self):
        assert EncoderConfig.fake_words(10) != EncoderConfig.fake_words(20)
        assert EncoderConfig.lexical_lsh(100) != EncoderConfig.lexical_lsh(200)


class TestFakeWords:
    def test_worked_example(self):
        bag = encode_fake_words(normalize(vec(3.0, 4.0)), 10)
        assert bag == {"f0p": 6, "f1p": 8}

    def test_negative_components_get_sign_split_terms(self):
        bag = encode_fake_words(normalize(vec(-3.0, 4.0)), 10)
        assert bag == {"f0n": 6, "f1p": 8}

    def test_small_components_drop_out(self):
        u = normalize(DenseVector("v", np.full(128, 1.0)))
        assert encode_fake_words(u, 10) == {}

    def test_frequency_conservation(self):
        # Total token mass equals the summed quantized magnitudes.
        rng = np.random.default_rng(21)
        for _ in range(50):
            u = normalize(DenseVector("v", rng.standard_normal(32)))
            for q in (5, 20, 60):
                bag = encode_fake_words(u, q)
                assert sum(bag.values()) == int(np.abs(quantize_fw(u, q)).sum())
                assert all(freq >= 1 for freq in bag.values())

    def test_deterministic(self):
        u = normalize(DenseVector("v", np.random.default_rng(22).standard_normal(16)))
        assert encode_fake_words(u, 30) == encode_fake_words(u, 30)


class TestLexTokens:
    def test_worked_example(self):
        assert lex_tokens(vec(0.12, 0.43, 0.74), 1) == ["1_0.1", "2_0.4", "3_0.7"]

    def test_half_away_from_zero(self):
        assert lex_tokens(vec(-0.15), 1) == ["1_-0.2"]
        assert lex_tokens(vec(0.15), 1) == ["1_0.2"]
        assert lex_tokens(vec(0.25), 1) == ["1_0.3"]

    def test_zero_components_keep_tokens(self):
        assert lex_tokens(vec(0.0, 0.0), 1) == ["1_0.0", "2_0.0"]

    def test_negative_zero_never_rendered(self):
        assert lex_tokens(vec(-0.04), 1) == ["1_0.0"]

    def test_exactly_d_decimals(self):
        assert lex_tokens(vec(0.5, 1.0, -0.125), 2) == ["1_0.50", "2_1.00", "3_-0.13"]

    def test_decimals_below_one_rejected(self):
        with pytest.raises(ValueError):
            lex_tokens(vec(0.5), 0)


class TestShingle:
    def test_worked_examples(self):
        assert shingle(["a", "b", "c"], 2) == ["a b", "b c"]
        assert shingle(["a"], 2) == ["a"]
        assert shingle([], 2) == []

    def test_unigrams_are_identity(self):
        assert shingle(["x", "y"], 1) == ["x", "y"]

    @given(st.lists(st.text(alphabet="ab_", min_size=1, max_size=4), max_size=12),
           st.integers(min_value=1, max_value=5))
    def test_count(self, tokens, n):
        grams = shingle(tokens, n)
        if not tokens:
            assert grams == []
        else:
            assert len(grams) == max(1, len(tokens) - n + 1)


class TestStableHash:
    # Frozen outputs of BLAKE2b with an 8-byte digest, big-endian.
    def test_reference_vectors(self):
        assert stable_hash64(b"") == 0xE4A6A0577479B2B4
        assert stable_hash64(b"a") == 0x40F89E395B66422F
        assert stable_hash64(b"abc") == 0xD8BB14D833D59559
        assert stable_hash64(b"1_0.1 2_0.4") == 0x6DDB7988EC9F0E80

    def test_range_and_determinism(self):
        for data in (b"x", b"hello world", bytes(range(256))):
            h = stable_hash64(data)
            assert 0 <= h < 2**64
            assert stable_hash64(data) == h


class TestMinhashSignature:
    def test_exactly_b_terms(self):
        grams = shingle([f"{i}_0.1" for i in range(1, 30)], 2)
        for b in (1, 7, 64):
            signature = minhash_signature(grams, b)
            assert len(signature) == b
            assert len(set(signature)) == b

    def test_single_gram_fills_every_bucket(self):
        h = stable_hash64(b"1_0.1 2_0.4")
        signature = minhash_signature(["1_0.1 2_0.4"], 4)
        assert signature == [f"lsh_{i}_{h:x}" for i in range(4)]

    def test_bucket_assignment_formula(self):
        # h("1_0.1 2_0.4") * 4 >> 64 == 1; h("2_0.4 3_0.7") lands in bucket 3.
        signature = minhash_signature(["1_0.1 2_0.4", "2_0.4 3_0.7"], 4)
        assert signature[1].startswith("lsh_1_6ddb7988ec9f0e80")
        assert signature[3].startswith("lsh_3_d33f70cb4a267cbc")

    def test_rotation_fill_uses_next_nonempty_cyclically(self):
        signature = minhash_signature(["1_0.1 2_0.4", "2_0.4 3_0.7"], 4)
        # Bucket 0 wraps forward to bucket 1's value, bucket 2 to bucket 3's.
        assert signature[0] == "lsh_0_6ddb7988ec9f0e80"
        assert signature[2] == "lsh_2_d33f70cb4a267cbc"

    def test_same_bucket_keeps_minimum(self):
        grams = ["1_0.1 2_0.4", "2_0.4 3_0.7", "3_0.7 4_0.2"]
        hashes = [stable_hash64(g.encode()) for g in grams]
        signature = minhash_signature(grams, 1)
        assert signature == [f"lsh_0_{min(hashes):x}"]

    def test_multiset_semantics(self):
        grams = ["a b", "b c"]
        assert minhash_signature(grams * 3, 8) == minhash_signature(grams, 8)

    def test_empty_input_rejected(self):
        with pytest.raises(EmptyInputError):
            minhash_signature([], 4)

    @given(st.lists(st.text(alphabet="abc ", min_size=1, max_size=6), min_size=1, max_size=20),
           st.integers(min_value=1, max_value=50))
    def test_always_exactly_b_distinct_terms(self, grams, b):
        signature = minhash_signature(grams, b)
        assert len(signature) == b
        assert len(set(signature)) == b


class TestEncodeLexicalLsh:
    def test_golden_term_bag(self):
        # Frozen from the hash/bucket arithmetic above: two shingles land in
        # buckets 1 and 3; rotation copies them into 0 and 2.
        bag = encode_lexical_lsh(vec(0.12, 0.43, 0.74), 1, 2, 4)
        assert bag == {
            "lsh_0_6ddb7988ec9f0e80": 1,
            "lsh_1_6ddb7988ec9f0e80": 1,
            "lsh_2_d33f70cb4a267cbc": 1,
            "lsh_3_d33f70cb4a267cbc": 1,
        }

    def test_all_frequencies_one(self):
        rng = np.random.default_rng(23)
        v = DenseVector("v", rng.standard_normal(64))
        bag = encode_lexical_lsh(v, 1, 2, 50)
        assert len(bag) == 50
        assert set(bag.values()) == {1}

    def test_identical_vectors_identical_bags(self):
        rng = np.random.default_rng(24)
        values = rng.standard_normal(32)
        a = encode_lexical_lsh(DenseVector("a", values.copy()), 1, 2, 30)
        b = encode_lexical_lsh(DenseVector("b", values.copy()), 1, 2, 30)
        assert a == b


class TestEncodeVector:
    def test_fake_words_normalizes_first(self):
        config = EncoderConfig.fake_words(10)
        assert encode_vector(config, vec(3.0, 4.0)) == encode_vector(config, vec(0.6, 0.8))

    def test_lexlsh_uses_raw_components(self):
        config = EncoderConfig.lexical_lsh(8)
        raw = vec(3.0, 4.0)
        scaled = vec(0.6, 0.8)
        assert encode_vector(config, raw) != encode_vector(config, scaled)
        assert encode_vector(config, raw) == encode_lexical_lsh(raw, 1, 2, 8)
