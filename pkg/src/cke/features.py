"""Tokenization, n-grams, vocabularies with hashed n-gram buckets, BOW
trigram vectors, node masking, and fixed-length sequence encoding."""

from __future__ import annotations

import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .errors import EmptyCorpus, InvalidNgramOrder, InvalidSpan

__all__ = [
    "Token",
    "Vocabulary",
    "SparseVector",
    "EncodedSequence",
    "tokenize",
    "remove_stopwords",
    "stopword_set",
    "word_ngrams",
    "build_vocab",
    "bow_trigram_vector",
    "mask_nodes",
    "encode_sequence",
    "fnv1a64",
    "NGRAM_SEP",
    "MAX_SEQ_LEN",
    "PAD", "UNK", "NODE1", "NODE2",
]

# Joins the tokens of an n-gram; U+241F cannot appear in tokenized text.
NGRAM_SEP = "␟"

MAX_SEQ_LEN = 70

PAD, UNK, NODE1, NODE2 = 0, 1, 2, 3
_SPECIALS = ("<pad>", "<unk>", "node1", "node2")

DEFAULT_BUCKET_COUNT = 2_000_000


@dataclass(frozen=True)
class Token:
    surface: str
    char_span: tuple[int, int]


def _normalize(raw: str) -> str:
    return unicodedata.normalize("NFKC", raw).lower()


def tokenize(text: str) -> list[Token]:
    """Lowercased, Unicode-normalized tokens with spans into the source text.

    Punctuation becomes single-character tokens; hyphens flanked by
    alphanumerics stay inside the word ("cross-level").
    """
    tokens: list[Token] = []
    start = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append(Token(_normalize(text[start:i]), (start, i)))
                start = None
            continue
        if ch.isalnum() or (
            ch == "-"
            and start is not None
            and i + 1 < len(text)
            and text[i + 1].isalnum()
        ):
            if start is None:
                start = i
            continue
        # punctuation: flush any open word, then emit the char alone
        if start is not None:
            tokens.append(Token(_normalize(text[start:i]), (start, i)))
            start = None
        tokens.append(Token(_normalize(ch), (i, i + 1)))
    if start is not None:
        tokens.append(Token(_normalize(text[start:]), (start, len(text))))
    return tokens


def stopword_set() -> frozenset[str]:
    data = resources.files("cke").joinpath("data/stopwords.txt").read_text("utf-8")
    return frozenset(w for w in data.split("\n") if w)


_STOPWORDS: frozenset[str] | None = None


def remove_stopwords(tokens: list[Token]) -> list[Token]:
    """Drop shipped stop words; node placeholders are always kept."""
    global _STOPWORDS
    if _STOPWORDS is None:
        _STOPWORDS = stopword_set()
    return [
        t
        for t in tokens
        if t.surface in ("node1", "node2") or t.surface not in _STOPWORDS
    ]


def _surfaces(tokens) -> list[str]:
    return [t.surface if isinstance(t, Token) else t for t in tokens]


def word_ngrams(tokens, n: int) -> list[str]:
    """Contiguous n-token windows joined with NGRAM_SEP; [] if too short."""
    if n < 1:
        raise InvalidNgramOrder(f"n must be >= 1, got {n}")
    surfaces = _surfaces(tokens)
    if n == 1:
        return surfaces
    return [NGRAM_SEP.join(surfaces[i : i + n]) for i in range(len(surfaces) - n + 1)]


def fnv1a64(s: str) -> int:
    """64-bit FNV-1a over the UTF-8 bytes of `s`."""
    h = 0xCBF29CE484222325
    for b in s.encode("utf-8"):
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass
class Vocabulary:
    """Token-to-index map plus a hashed bucket space for word n-grams.

    Indices are dense; PAD is always 0. N-grams of order 2..n_gram_order map
    into [vocab_size, vocab_size + bucket_count) via FNV-1a modulo buckets.
    """

    word_to_index: dict[str, int]
    min_count: int = 1
    n_gram_order: int = 1
    bucket_count: int = DEFAULT_BUCKET_COUNT
    counts: dict[str, int] = field(default_factory=dict)

    @property
    def vocab_size(self) -> int:
        return len(self.word_to_index)

    @property
    def total_size(self) -> int:
        return self.vocab_size + (self.bucket_count if self.n_gram_order > 1 else 0)

    def token_id(self, surface: str) -> int:
        return self.word_to_index.get(surface, UNK)

    def ngram_bucket(self, gram: str) -> int:
        return fnv1a64(gram) % self.bucket_count

    def ngram_id(self, gram: str) -> int:
        return self.vocab_size + self.ngram_bucket(gram)

    def feature_ids(self, tokens) -> list[int]:
        """Token ids plus hashed ids for every n-gram order the vocab carries."""
        surfaces = _surfaces(tokens)
        ids = [self.token_id(s) for s in surfaces]
        for n in range(2, self.n_gram_order + 1):
            ids.extend(self.ngram_id(g) for g in word_ngrams(surfaces, n))
        return ids


def build_vocab(
    corpus,
    min_count: int = 1,
    n_gram_order: int = 1,
    bucket_count: int = DEFAULT_BUCKET_COUNT,
) -> Vocabulary:
    """Index corpus tokens by descending frequency (ties lexicographic).

    `corpus` is a list of token lists. Tokens below min_count fall back to
    UNK at lookup time.
    """
    if not corpus:
        raise EmptyCorpus("empty corpus")
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    if bucket_count < 0:
        raise ValueError("bucket_count must be >= 0")
    counts: Counter[str] = Counter()
    for tokens in corpus:
        counts.update(_surfaces(tokens))
    word_to_index = {w: i for i, w in enumerate(_SPECIALS)}
    eligible = [w for w, c in counts.items() if c >= min_count and w not in word_to_index]
    eligible.sort(key=lambda w: (-counts[w], w))
    for w in eligible:
        word_to_index[w] = len(word_to_index)
    return Vocabulary(
        word_to_index=word_to_index,
        min_count=min_count,
        n_gram_order=n_gram_order,
        bucket_count=bucket_count,
        counts=dict(counts),
    )


@dataclass(frozen=True)
class SparseVector:
    indices: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.indices) != len(self.values):
            raise ValueError("indices/values length mismatch")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError("indices must be strictly increasing")

    def l1(self) -> float:
        return float(sum(abs(v) for v in self.values))

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        if self.indices:
            out[list(self.indices)] = self.values
        return out


def bow_trigram_vector(tokens, vocab: Vocabulary) -> SparseVector:
    """Raw trigram counts over the hashed trigram space (dim = bucket_count).

    Sentences shorter than three tokens yield the zero vector.
    """
    if vocab.n_gram_order < 3:
        raise InvalidNgramOrder("vocabulary was built without trigrams")
    counts = Counter(vocab.ngram_bucket(g) for g in word_ngrams(tokens, 3))
    idx = sorted(counts)
    return SparseVector(tuple(idx), tuple(float(counts[i]) for i in idx))


def mask_nodes(sentence, node1_span: tuple[int, int], node2_span: tuple[int, int]) -> str:
    """Replace the cause and effect spans with literal `node1` / `node2`."""
    text = sentence.text if hasattr(sentence, "text") else sentence
    for name, (s, e) in (("node1", node1_span), ("node2", node2_span)):
        if not (0 <= s < e <= len(text)):
            raise InvalidSpan(f"{name} span ({s}, {e}) outside sentence of length {len(text)}")
    (s1, e1), (s2, e2) = node1_span, node2_span
    if s1 < e2 and s2 < e1:
        raise InvalidSpan("node spans overlap")
    pieces = sorted([(s1, e1, "node1"), (s2, e2, "node2")], reverse=True)
    for s, e, label in pieces:
        text = text[:s] + label + text[e:]
    return text


@dataclass(frozen=True)
class EncodedSequence:
    ids: tuple[int, ...]
    mask: tuple[bool, ...]
    original_length: int

    def __post_init__(self):
        if len(self.ids) != len(self.mask):
            raise ValueError("ids/mask length mismatch")
        n_real = sum(self.mask)
        if tuple(self.mask) != tuple(i < n_real for i in range(len(self.mask))):
            raise ValueError("mask must be a true-prefix")

    def __len__(self) -> int:
        return len(self.ids)


def encode_sequence(tokens, vocab: Vocabulary, max_len: int = MAX_SEQ_LEN) -> EncodedSequence:
    """Token ids right-padded (or truncated) to max_len with a validity mask."""
    surfaces = _surfaces(tokens)
    ids = [vocab.token_id(s) for s in surfaces[:max_len]]
    n_real = len(ids)
    ids.extend([PAD] * (max_len - n_real))
    mask = [i < n_real for i in range(max_len)]
    return EncodedSequence(tuple(ids), tuple(mask), original_length=len(surfaces))
