from __future__ import annotations

import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cke.errors import EmptyCorpus, InvalidNgramOrder, InvalidSpan
from cke.features import (
    NGRAM_SEP,
    PAD,
    UNK,
    EncodedSequence,
    SparseVector,
    bow_trigram_vector,
    build_vocab,
    encode_sequence,
    fnv1a64,
    mask_nodes,
    remove_stopwords,
    stopword_set,
    tokenize,
    word_ngrams,
)

from conftest import MASKING_EXAMPLE


# --- tokenize -------------------------------------------------------------------


def surfaces(text):
    return [t.surface for t in tokenize(text)]


def test_tokenize_masked_example():
    assert surfaces("Node1 causes better node2.") == ["node1", "causes", "better", "node2", "."]


def test_tokenize_empty():
    assert tokenize("") == []


TOKENIZER_FIXTURES = [
    ("cross-level effects, really", ["cross-level", "effects", ",", "really"]),
    ("firm's value", ["firm", "'", "s", "value"]),
    ("a 3.5-fold rise", ["a", "3", ".", "5-fold", "rise"]),
    ("(H3) holds", ["(", "h3", ")", "holds"]),
    ("-x", ["-", "x"]),
    ("UPPER Case", ["upper", "case"]),
]


@pytest.mark.parametrize("text,expected", TOKENIZER_FIXTURES)
def test_tokenizer_fixture_file(text, expected):
    assert surfaces(text) == expected


@given(st.text(alphabet=string.printable, max_size=120))
@settings(max_examples=300, deadline=None)
def test_tokenize_coverage_property(text):
    toks = tokenize(text)
    covered = []
    for t in toks:
        a, b = t.char_span
        assert b > a
        covered.extend(range(a, b))
    non_ws = [i for i, ch in enumerate(text) if not ch.isspace()]
    assert covered == non_ws  # ordered, non-overlapping, exactly the non-ws chars


# --- stop words -------------------------------------------------------------------


def test_stopword_list_shape():
    words = stopword_set()
    assert 100 <= len(words) <= 200
    assert {"the", "is", "to", "with"} <= words


def test_remove_stopwords_basic():
    assert [t.surface for t in remove_stopwords(tokenize("the firm performs"))] == [
        "firm",
        "performs",
    ]


def test_remove_stopwords_keeps_nodes():
    kept = [t.surface for t in remove_stopwords(tokenize("node1 is related to node2"))]
    assert kept == ["node1", "related", "node2"]


def test_remove_stopwords_empty():
    assert remove_stopwords([]) == []


# --- n-grams ----------------------------------------------------------------------


def test_bigrams_definition():
    assert word_ngrams(["a", "b", "c"], 2) == [f"a{NGRAM_SEP}b", f"b{NGRAM_SEP}c"]


def test_window_larger_than_sequence():
    assert word_ngrams(["a", "b"], 3) == []


def test_unigrams_are_surfaces():
    assert word_ngrams(tokenize("x y"), 1) == ["x", "y"]


def test_invalid_order():
    with pytest.raises(InvalidNgramOrder):
        word_ngrams(["a"], 0)


@given(st.lists(st.sampled_from("abcde"), max_size=12), st.integers(1, 6))
@settings(max_examples=300, deadline=None)
def test_ngram_count_law(tokens, n):
    assert len(word_ngrams(tokens, n)) == max(0, len(tokens) - n + 1)


def test_fnv1a64_known_vectors():
    assert fnv1a64("") == 0xCBF29CE484222325
    assert fnv1a64("a") == 0xAF63DC4C8601EC8C


# --- vocabulary --------------------------------------------------------------------


def test_vocab_frequency_ordering():
    corpus = [["the"] * 9 + ["firm"] * 5]
    vocab = build_vocab(corpus)
    assert vocab.word_to_index["the"] < vocab.word_to_index["firm"]
    assert vocab.word_to_index["<pad>"] == PAD == 0


def test_vocab_min_count_threshold():
    vocab = build_vocab([["rare", "common", "common"]], min_count=2)
    assert "rare" not in vocab.word_to_index
    assert vocab.token_id("rare") == UNK


def test_vocab_dense_indices_and_determinism():
    corpus = [["b", "a", "a"], ["c", "b", "a"]]
    v1 = build_vocab(corpus)
    v2 = build_vocab(corpus)
    assert v1.word_to_index == v2.word_to_index
    assert sorted(v1.word_to_index.values()) == list(range(v1.vocab_size))


def test_vocab_tie_break_lexicographic():
    vocab = build_vocab([["zeta", "alpha"]])
    assert vocab.word_to_index["alpha"] < vocab.word_to_index["zeta"]


def test_vocab_empty_corpus():
    with pytest.raises(EmptyCorpus):
        build_vocab([])


def test_ngram_ids_live_in_bucket_range():
    rng = np.random.default_rng(0)
    vocab = build_vocab(
        [[f"w{i}" for i in rng.integers(0, 40, size=12)] for _ in range(20)],
        n_gram_order=2,
        bucket_count=1000,
    )
    for _ in range(200):
        toks = [f"w{i}" for i in rng.integers(0, 60, size=6)]
        for gid in vocab.feature_ids(toks)[len(toks):]:
            assert vocab.vocab_size <= gid < vocab.vocab_size + 1000


# --- sparse vectors / BOW -----------------------------------------------------------


def test_sparse_vector_invariants():
    with pytest.raises(ValueError):
        SparseVector((3, 1), (1.0, 1.0))
    with pytest.raises(ValueError):
        SparseVector((1,), (1.0, 2.0))
    v = SparseVector((1, 4), (2.0, 1.0))
    assert v.l1() == 3.0
    assert list(v.to_dense(6)) == [0, 2.0, 0, 0, 1.0, 0]


def _trigram_vocab(corpus):
    return build_vocab(corpus, n_gram_order=3, bucket_count=5000)


def test_bow_zero_vector_for_short_input():
    vocab = _trigram_vocab([["a", "b", "c"]])
    v = bow_trigram_vector(["a", "b"], vocab)
    assert v.indices == () and v.values == ()


def test_bow_repeated_trigram_counts():
    vocab = _trigram_vocab([["a", "b", "c"]])
    toks = ["a", "b", "c"] * 3
    v = bow_trigram_vector(toks, vocab)
    # brute-force window counter as the oracle
    from collections import Counter

    windows = Counter(tuple(toks[i : i + 3]) for i in range(len(toks) - 2))
    assert windows[("a", "b", "c")] == 3
    assert v.l1() == len(toks) - 2
    abc = vocab.ngram_bucket(NGRAM_SEP.join(["a", "b", "c"]))
    assert dict(zip(v.indices, v.values))[abc] == 3.0


def test_bow_l1_matches_window_count_on_masked_sentence():
    toks = [t.surface for t in remove_stopwords(tokenize("node1 causes better node2."))]
    vocab = _trigram_vocab([toks])
    v = bow_trigram_vector(toks, vocab)
    assert v.l1() == len(toks) - 2


def test_bow_requires_trigram_vocab():
    vocab = build_vocab([["a"]], n_gram_order=1)
    with pytest.raises(InvalidNgramOrder):
        bow_trigram_vector(["a", "b", "c"], vocab)


# --- node masking -------------------------------------------------------------------


def test_mask_nodes_paper_example():
    n1 = (0, len("Playing music"))
    start = MASKING_EXAMPLE.index("concentration")
    n2 = (start, start + len("concentration"))
    assert mask_nodes(MASKING_EXAMPLE, n1, n2) == "node1 causes better node2."


def test_mask_nodes_full_coverage():
    text = "alpha beta"
    assert mask_nodes(text, (0, 5), (6, 10)) == "node1 node2"


def test_mask_nodes_rejects_overlap():
    with pytest.raises(InvalidSpan):
        mask_nodes("abcdef", (0, 4), (3, 6))


def test_mask_nodes_rejects_out_of_range():
    with pytest.raises(InvalidSpan):
        mask_nodes("abc", (0, 2), (2, 9))


def test_mask_nodes_order_independent_of_span_order():
    text = "improved morale boosts output"
    assert mask_nodes(text, (16, 22), (0, 15)) == "node2 node1 output"


@given(st.text(alphabet=string.ascii_lowercase + " ", min_size=4, max_size=40))
@settings(max_examples=200, deadline=None)
def test_mask_nodes_exactly_one_of_each(text):
    n = len(text)
    a, b = 0, max(1, n // 3)
    c, d = min(n - 1, b + 1), n
    if not (a < b <= c < d):
        return
    out = mask_nodes(text, (a, b), (c, d))
    assert out.count("node1") == 1 + text.count("node1")
    assert out.count("node2") == 1 + text.count("node2")


# --- sequence encoding ---------------------------------------------------------------


def test_encode_pads_to_70():
    vocab = build_vocab([["a", "b"]])
    seq = encode_sequence(["a", "b", "zz"], vocab)
    assert len(seq.ids) == len(seq.mask) == 70
    assert seq.ids[2] == UNK
    assert all(i == PAD for i in seq.ids[3:])
    assert sum(seq.mask) == 3
    assert seq.original_length == 3


def test_encode_exactly_70():
    vocab = build_vocab([["a"]])
    seq = encode_sequence(["a"] * 70, vocab)
    assert sum(seq.mask) == 70 and seq.original_length == 70


def test_encode_truncates_over_70():
    vocab = build_vocab([["a"]])
    seq = encode_sequence(["a"] * 80, vocab)
    assert len(seq.ids) == 70
    assert all(seq.mask)
    assert seq.original_length == 80


@given(st.integers(0, 120))
@settings(max_examples=80, deadline=None)
def test_encode_mask_popcount(n):
    vocab = build_vocab([["a"]])
    if n == 0:
        seq = encode_sequence([], vocab)
    else:
        seq = encode_sequence(["a"] * n, vocab)
    assert sum(seq.mask) == min(n, 70)


def test_encoded_sequence_invariant():
    with pytest.raises(ValueError):
        EncodedSequence((1, 2), (False, True), original_length=1)
