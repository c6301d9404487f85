"""Shallow text classifier: averaged token/n-gram embeddings feeding a linear
head, trained by plain SGD with either softmax cross-entropy or negative
sampling. The same negative-sampling machinery also trains distributed
bag-of-words sentence vectors for downstream feature use.

All math is float64 numpy; training is single-threaded and bit-reproducible
for a fixed seed. Sentence embeddings sum rows in sorted-id order, so token
order never changes the result (uni-gram configs are fully order-blind).
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataset, EmptyCorpus, EmptyInput, UnknownLabel
from .features import Vocabulary, build_vocab, _surfaces

__all__ = [
    "ClassifierConfig",
    "EmbeddingClassifierModel",
    "DocVectorModel",
    "sentence_embedding",
    "predict",
    "loss_and_grads",
    "train",
    "train_doc_vectors",
    "infer_doc_vector",
]

SOFTMAX = "softmax"
NEGATIVE_SAMPLING = "negative_sampling"

# Smoothing exponent for noise distributions, shared with the word2vec family.
NOISE_POWER = 0.75


@dataclass(frozen=True)
class ClassifierConfig:
    ngram_order: int = 1
    learning_rate: float = 0.1
    dim: int = 120
    loss: str = NEGATIVE_SAMPLING
    epochs: int = 25
    neg_samples: int = 5
    seed: int = 42
    min_count: int = 1
    # Hashed n-gram bucket space; kept small because every bucket owns a dense
    # embedding row (the sparse-feature modules use a much larger space).
    bucket_count: int = 100_000

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.loss not in (SOFTMAX, NEGATIVE_SAMPLING):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.loss == NEGATIVE_SAMPLING and self.neg_samples < 1:
            raise ValueError("neg_samples must be >= 1 for negative sampling")


@dataclass
class EmbeddingClassifierModel:
    vocab: Vocabulary
    input_embeddings: np.ndarray  # (vocab_size + buckets) x dim
    output_weights: np.ndarray  # n_labels x dim
    labels: list[str]
    config: ClassifierConfig
    label_counts: dict[str, int] = field(default_factory=dict)

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"label {label!r} not in {self.labels}") from None

    def feature_ids(self, tokens) -> list[int]:
        return self.vocab.feature_ids(tokens)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max()
    e = np.exp(z)
    return e / e.sum()


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def sentence_embedding(model: EmbeddingClassifierModel, ids) -> np.ndarray:
    """Element-wise mean of the embedding rows for the given feature ids."""
    if len(ids) == 0:
        raise EmptyInput("no feature ids")
    order = np.sort(np.asarray(ids, dtype=np.int64))
    return model.input_embeddings[order].mean(axis=0)


def predict(model: EmbeddingClassifierModel, tokens) -> tuple[str, dict[str, float]]:
    """Softmax probabilities over labels; argmax wins, ties break by label order."""
    surfaces = _surfaces(tokens)
    if not surfaces:
        raise EmptyInput("no tokens")
    h = sentence_embedding(model, model.feature_ids(surfaces))
    probs = _softmax(model.output_weights @ h)
    best = int(np.argmax(probs))
    return model.labels[best], {lab: float(p) for lab, p in zip(model.labels, probs)}


def _noise_distribution(label_counts: dict[str, int], labels: list[str]) -> np.ndarray:
    freq = np.array([label_counts.get(lab, 0) for lab in labels], dtype=np.float64)
    weights = np.power(np.maximum(freq, 1.0), NOISE_POWER)
    return weights / weights.sum()


def _draw_negatives(
    rng: np.random.Generator, noise: np.ndarray, target: int, k: int
) -> np.ndarray:
    p = noise.copy()
    p[target] = 0.0
    p /= p.sum()
    return rng.choice(len(noise), size=k, p=p)


def loss_and_grads(
    model: EmbeddingClassifierModel,
    example: tuple,
    loss_kind: str,
    *,
    negatives=None,
    rng: np.random.Generator | None = None,
):
    """Loss and gradients for one (ids, label) example.

    Returns (loss, emb_grads, out_grads) where each grads value is a
    {row_index: gradient vector} map covering every touched parameter row.
    Negative-sampling negatives may be passed explicitly (for gradient
    checking) or drawn from `rng`.
    """
    ids, label = example
    y = model.label_index(label)
    order = np.sort(np.asarray(ids, dtype=np.int64))
    h = model.input_embeddings[order].mean(axis=0)
    k = len(order)

    if loss_kind == SOFTMAX:
        scores = model.output_weights @ h
        probs = _softmax(scores)
        loss = -float(np.log(probs[y]))
        d_scores = probs.copy()
        d_scores[y] -= 1.0
        out_rows = np.arange(len(model.labels))
    elif loss_kind == NEGATIVE_SAMPLING:
        if negatives is None:
            if rng is None:
                raise ValueError("negative sampling needs negatives or an rng")
            noise = _noise_distribution(model.label_counts, model.labels)
            negatives = _draw_negatives(rng, noise, y, model.config.neg_samples)
        out_rows = np.concatenate(([y], np.asarray(negatives, dtype=np.int64)))
        scores = model.output_weights[out_rows] @ h
        targets = np.zeros(len(out_rows))
        targets[0] = 1.0
        p = _sigmoid(scores)
        eps = 1e-12
        loss = -float(
            np.log(p[0] + eps) + np.log(1.0 - p[1:] + eps).sum()
        )
        d_scores = p - targets
    else:
        raise ValueError(f"unknown loss {loss_kind!r}")

    d_h = d_scores @ model.output_weights[out_rows]
    out_grads: dict[int, np.ndarray] = {}
    for r, ds in zip(out_rows, d_scores):
        g = ds * h
        if int(r) in out_grads:
            out_grads[int(r)] = out_grads[int(r)] + g
        else:
            out_grads[int(r)] = g
    emb_row = d_h / k
    emb_grads: dict[int, np.ndarray] = {}
    for i in order:
        ii = int(i)
        if ii in emb_grads:
            emb_grads[ii] = emb_grads[ii] + emb_row
        else:
            emb_grads[ii] = emb_row.copy()
    return loss, emb_grads, out_grads


def _init_model(
    vocab: Vocabulary, labels: list[str], config: ClassifierConfig, rng: np.random.Generator
) -> EmbeddingClassifierModel:
    n_rows = vocab.total_size
    bound = 1.0 / (2.0 * config.dim)
    emb = rng.uniform(-bound, bound, size=(n_rows, config.dim))
    out = np.zeros((len(labels), config.dim))
    return EmbeddingClassifierModel(
        vocab=vocab, input_embeddings=emb, output_weights=out, labels=labels, config=config
    )


def train(dataset: list[tuple], config: ClassifierConfig) -> EmbeddingClassifierModel:
    """SGD over shuffled examples with a linear learning-rate decay to zero.

    `dataset` is a list of (tokens, label). The model is a pure function of
    (dataset, config): identical seeds give bit-identical parameters.
    """
    if not dataset:
        raise EmptyCorpus("empty dataset")
    labels = sorted({lab for _, lab in dataset})
    if len(labels) < 2:
        raise DegenerateDataset("need at least 2 distinct labels")
    rng = np.random.default_rng(config.seed)
    token_lists = [_surfaces(toks) for toks, _ in dataset]
    vocab = build_vocab(
        token_lists,
        min_count=config.min_count,
        n_gram_order=config.ngram_order,
        bucket_count=config.bucket_count if config.ngram_order > 1 else 0,
    )
    model = _init_model(vocab, labels, config, rng)
    model.label_counts = dict(Counter(lab for _, lab in dataset))
    noise = _noise_distribution(model.label_counts, labels)
    restricted = []
    for y in range(len(labels)):
        p = noise.copy()
        p[y] = 0.0
        restricted.append(p / p.sum())

    examples = []
    for surfaces, (_, lab) in zip(token_lists, dataset):
        ids = np.sort(np.asarray(vocab.feature_ids(surfaces), dtype=np.int64))
        if len(ids) == 0:
            raise EmptyInput("dataset contains an example with no tokens")
        examples.append((ids, labels.index(lab)))

    emb, out = model.input_embeddings, model.output_weights
    n = len(examples)
    total_steps = config.epochs * n
    step = 0
    n_labels = len(labels)
    for _ in range(config.epochs):
        for idx in rng.permutation(n):
            ids, y = examples[idx]
            lr = config.learning_rate * (1.0 - step / total_steps)
            step += 1
            h = emb[ids].mean(axis=0)
            if config.loss == SOFTMAX:
                probs = _softmax(out @ h)
                d_scores = probs
                d_scores[y] -= 1.0
                d_h = d_scores @ out
                out -= lr * np.outer(d_scores, h)
            else:
                negs = rng.choice(n_labels, size=config.neg_samples, p=restricted[y])
                rows = np.concatenate(([y], negs))
                scores = out[rows] @ h
                p = _sigmoid(scores)
                p[0] -= 1.0
                d_h = p @ out[rows]
                np.add.at(out, rows, -lr * np.outer(p, h))
            np.add.at(emb, ids, (-lr / len(ids)) * d_h)
    return model


# --- distributed bag-of-words sentence vectors -------------------------------


@dataclass
class DocVectorModel:
    doc_vectors: np.ndarray  # n_docs x dim
    context_weights: np.ndarray  # vocab_size x dim
    dim: int
    word_to_index: dict[str, int]
    word_counts: dict[str, int]
    neg_samples: int = 5

    def noise_distribution(self) -> np.ndarray:
        freq = np.zeros(len(self.word_to_index))
        for w, i in self.word_to_index.items():
            freq[i] = self.word_counts.get(w, 0)
        weights = np.power(np.maximum(freq, 1.0), NOISE_POWER)
        return weights / weights.sum()


def _dbow_step_grads(
    vec: np.ndarray, context: np.ndarray, target: int, negatives: np.ndarray
):
    """Loss and grads of the negative-sampling objective for one target word."""
    rows = np.concatenate(([target], negatives))
    scores = context[rows] @ vec
    p = _sigmoid(scores)
    eps = 1e-12
    loss = -float(np.log(p[0] + eps) + np.log(1.0 - p[1:] + eps).sum())
    d_scores = p.copy()
    d_scores[0] -= 1.0
    d_vec = d_scores @ context[rows]
    return loss, d_vec, rows, d_scores


def _draw_word_negatives(
    rng: np.random.Generator, noise_cdf: np.ndarray, target: int, k: int
) -> np.ndarray:
    out = np.empty(k, dtype=np.int64)
    for j in range(k):
        draw = int(np.searchsorted(noise_cdf, rng.random(), side="right"))
        tries = 0
        while draw == target and tries < 100:
            draw = int(np.searchsorted(noise_cdf, rng.random(), side="right"))
            tries += 1
        out[j] = draw
    return out


def train_doc_vectors(
    corpus,
    dim: int = 50,
    epochs: int = 20,
    neg_samples: int = 5,
    seed: int = 42,
    lr: float = 0.05,
) -> DocVectorModel:
    """Train one vector per sentence to predict its own tokens (DBOW).

    Negatives come from the unigram^0.75 noise distribution. Deterministic
    per seed; epochs=0 returns the random initialization untouched.
    """
    if not corpus:
        raise EmptyCorpus("empty corpus")
    token_lists = [_surfaces(toks) for toks in corpus]
    counts: Counter[str] = Counter()
    for toks in token_lists:
        counts.update(toks)
    word_to_index = {w: i for i, w in enumerate(sorted(counts))}
    rng = np.random.default_rng(seed)
    doc_vectors = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(corpus), dim))
    context = np.zeros((max(len(word_to_index), 1), dim))
    model = DocVectorModel(
        doc_vectors=doc_vectors,
        context_weights=context,
        dim=dim,
        word_to_index=word_to_index,
        word_counts=dict(counts),
        neg_samples=neg_samples,
    )
    noise_cdf = np.cumsum(model.noise_distribution())
    encoded = [
        np.array([word_to_index[w] for w in toks], dtype=np.int64) for toks in token_lists
    ]
    total_steps = max(epochs * len(corpus), 1)
    step = 0
    for _ in range(epochs):
        for d in rng.permutation(len(corpus)):
            cur_lr = lr * (1.0 - step / total_steps)
            step += 1
            vec = doc_vectors[d]
            for target in encoded[d]:
                negs = _draw_word_negatives(rng, noise_cdf, int(target), neg_samples)
                _, d_vec, rows, d_scores = _dbow_step_grads(vec, context, int(target), negs)
                np.add.at(context, rows, -cur_lr * np.outer(d_scores, vec))
                vec -= cur_lr * d_vec
    return model


def infer_doc_vector(
    model: DocVectorModel, tokens, steps: int = 50, lr: float = 0.05, seed: int = 42
) -> np.ndarray:
    """Fit a fresh vector to an unseen sentence against frozen context weights.

    Unknown tokens are skipped; steps=0 returns the random initialization.
    """
    rng = np.random.default_rng(seed)
    vec = rng.uniform(-0.5 / model.dim, 0.5 / model.dim, size=model.dim)
    ids = [model.word_to_index[w] for w in _surfaces(tokens) if w in model.word_to_index]
    if not ids:
        return vec
    noise_cdf = np.cumsum(model.noise_distribution())
    for step in range(steps):
        cur_lr = lr * (1.0 - step / max(steps, 1))
        for target in ids:
            negs = _draw_word_negatives(rng, noise_cdf, target, model.neg_samples)
            _, d_vec, _, _ = _dbow_step_grads(vec, model.context_weights, target, negs)
            vec -= cur_lr * d_vec
    return vec
