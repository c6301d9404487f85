"""Cause/effect entity tagger: a bi-directional LSTM over embedded token
sequences emitting per-token labels (0 non-entity, 1 cause, 2 effect), with
span decoding into entity pairs.

Forward, backward, and the adaptive-moment optimizer are written directly in
numpy (float64). Recurrent state updates are gated by the padding mask, so
neither predictions nor the loss can depend on what sits in padding cells.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, EmptyCorpus, LabelAlignmentError
from .features import EncodedSequence

__all__ = [
    "TaggerConfig",
    "LstmCell",
    "TaggerModel",
    "EntityPair",
    "TrainingCurve",
    "lstm_forward",
    "tag_sentence",
    "train_tagger",
    "extract_entities",
    "tagger_loss_and_grads",
]

N_TAGS = 3  # 0 non-entity, 1 cause, 2 effect


@dataclass(frozen=True)
class TaggerConfig:
    embed_dim: int = 32
    hidden_units: int = 3
    batch_size: int = 32
    epochs: int = 60
    lr: float = 1e-3
    seed: int = 42
    max_len: int = 70

    def __post_init__(self):
        if min(self.embed_dim, self.hidden_units, self.batch_size, self.epochs + 1) < 1:
            raise ValueError("tagger dimensions must be positive")


@dataclass
class LstmCell:
    """One direction's parameters; gates stacked in i, f, o, g order."""

    W: np.ndarray  # (4H, E) input projections
    U: np.ndarray  # (4H, H) recurrent projections
    b: np.ndarray  # (4H,)

    @property
    def hidden(self) -> int:
        return self.U.shape[1]

    @property
    def input_dim(self) -> int:
        return self.W.shape[1]


@dataclass
class TaggerModel:
    token_embeddings: np.ndarray  # vocab x E
    forward_cell: LstmCell
    backward_cell: LstmCell
    head_W: np.ndarray  # N_TAGS x 2H
    head_b: np.ndarray  # (N_TAGS,)
    config: TaggerConfig


@dataclass(frozen=True)
class EntityPair:
    cause_span: tuple[int, int] | None
    effect_span: tuple[int, int] | None


@dataclass
class TrainingCurve:
    rows: list[tuple[int, float, float]] = field(default_factory=list)

    def to_csv(self) -> str:
        lines = ["epoch,train_accuracy,val_accuracy"]
        lines.extend(f"{e},{tr:.6f},{va:.6f}" for e, tr, va in self.rows)
        return "\n".join(lines) + "\n"


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


def _cell_forward(cell: LstmCell, X: np.ndarray, mask: np.ndarray):
    """Run one direction over (B, T, E) inputs with (B, T) mask.

    Masked steps keep the previous h/c, so padding cells never touch state.
    Returns hidden states (B, T, H) and the per-step cache for backprop.
    """
    B, T, _ = X.shape
    H = cell.hidden
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    hs = np.zeros((B, T, H))
    # input projections for every step at once; only the recurrence loops
    XW = X.reshape(B * T, -1) @ cell.W.T
    XW = XW.reshape(B, T, 4 * H) + cell.b
    cache = []
    for t in range(T):
        a = XW[:, t] + h @ cell.U.T
        i = _sigmoid(a[:, :H])
        f = _sigmoid(a[:, H : 2 * H])
        o = _sigmoid(a[:, 2 * H : 3 * H])
        g = np.tanh(a[:, 3 * H :])
        c_raw = f * c + i * g
        tanh_c = np.tanh(c_raw)
        h_raw = o * tanh_c
        m = mask[:, t : t + 1]
        cache.append((i, f, o, g, c, h, tanh_c))
        c = m * c_raw + (1.0 - m) * c
        h = m * h_raw + (1.0 - m) * h
        hs[:, t] = h
    return hs, cache


def _cell_backward(cell: LstmCell, X, mask, cache, d_hs):
    """Reverse-mode pass; returns input grads and parameter grads."""
    B, T, _ = X.shape
    H = cell.hidden
    das = np.zeros((B, T, 4 * H))
    dU = np.zeros_like(cell.U)
    dh_next = np.zeros((B, H))
    dc_next = np.zeros((B, H))
    for t in reversed(range(T)):
        i, f, o, g, c_prev, h_prev, tanh_c = cache[t]
        m = mask[:, t : t + 1]
        dh_total = d_hs[:, t] + dh_next
        dh_raw = m * dh_total
        dc_raw = m * dc_next
        carry_h = (1.0 - m) * dh_total
        carry_c = (1.0 - m) * dc_next
        do = dh_raw * tanh_c
        dc_raw = dc_raw + dh_raw * o * (1.0 - tanh_c**2)
        df = dc_raw * c_prev
        di = dc_raw * g
        dg = dc_raw * i
        dc_prev = dc_raw * f + carry_c
        da = np.concatenate(
            [di * i * (1 - i), df * f * (1 - f), do * o * (1 - o), dg * (1 - g * g)],
            axis=1,
        )
        das[:, t] = da
        dU += da.T @ h_prev
        dh_next = da @ cell.U + carry_h
        dc_next = dc_prev
    flat_da = das.reshape(B * T, 4 * H)
    dW = flat_da.T @ X.reshape(B * T, -1)
    db = flat_da.sum(axis=0)
    dX = (flat_da @ cell.W).reshape(X.shape)
    return dX, dW, dU, db


def lstm_forward(cell: LstmCell, inputs) -> np.ndarray:
    """Hidden states for one unbatched sequence (zero initial state)."""
    X = np.asarray(inputs, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cell.input_dim:
        raise DimensionMismatch(
            f"inputs must be (T, {cell.input_dim}), got {X.shape}"
        )
    hs, _ = _cell_forward(cell, X[None], np.ones((1, X.shape[0])))
    return hs[0]


def _bilstm_logits(model: TaggerModel, ids: np.ndarray, mask: np.ndarray):
    """Logits (B, T, 3) plus everything backprop needs."""
    X = model.token_embeddings[ids]
    hs_f, cache_f = _cell_forward(model.forward_cell, X, mask)
    Xr = X[:, ::-1]
    mr = mask[:, ::-1]
    hs_b_rev, cache_b = _cell_forward(model.backward_cell, Xr, mr)
    hs_b = hs_b_rev[:, ::-1]
    Z = np.concatenate([hs_f, hs_b], axis=2)
    logits = Z @ model.head_W.T + model.head_b
    return logits, (X, Xr, mr, cache_f, cache_b, Z)


def _masked_ce(logits: np.ndarray, labels: np.ndarray, mask: np.ndarray):
    """Cross-entropy summed over non-padding positions, with d_logits."""
    z = logits - logits.max(axis=2, keepdims=True)
    e = np.exp(z)
    probs = e / e.sum(axis=2, keepdims=True)
    B, T, _ = logits.shape
    onehot = np.zeros_like(probs)
    bi, ti = np.meshgrid(np.arange(B), np.arange(T), indexing="ij")
    onehot[bi, ti, labels] = 1.0
    picked = (probs * onehot).sum(axis=2)
    loss = float(-(np.log(np.maximum(picked, 1e-300)) * mask).sum())
    d_logits = (probs - onehot) * mask[:, :, None]
    return loss, d_logits


def tagger_loss_and_grads(model: TaggerModel, ids, mask, labels):
    """Summed masked cross-entropy and gradients for every parameter group.

    Gradient keys: embeddings, fwd_W/fwd_U/fwd_b, bwd_W/bwd_U/bwd_b,
    head_W/head_b.
    """
    ids = np.asarray(ids, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    logits, (X, Xr, mr, cache_f, cache_b, Z) = _bilstm_logits(model, ids, mask)
    loss, d_logits = _masked_ce(logits, labels, mask)

    H = model.forward_cell.hidden
    flat_dl = d_logits.reshape(-1, N_TAGS)
    d_head_W = flat_dl.T @ Z.reshape(-1, 2 * H)
    d_head_b = flat_dl.sum(axis=0)
    dZ = d_logits @ model.head_W
    d_hs_f = dZ[:, :, :H]
    d_hs_b = dZ[:, :, H:]

    dX_f, dWf, dUf, dbf = _cell_backward(model.forward_cell, X, mask, cache_f, d_hs_f)
    dX_b_rev, dWb, dUb, dbb = _cell_backward(
        model.backward_cell, Xr, mr, cache_b, d_hs_b[:, ::-1]
    )
    dX = dX_f + dX_b_rev[:, ::-1]
    d_emb = np.zeros_like(model.token_embeddings)
    np.add.at(d_emb, ids.ravel(), dX.reshape(-1, X.shape[2]))
    grads = {
        "embeddings": d_emb,
        "fwd_W": dWf, "fwd_U": dUf, "fwd_b": dbf,
        "bwd_W": dWb, "bwd_U": dUb, "bwd_b": dbb,
        "head_W": d_head_W, "head_b": d_head_b,
    }
    return loss, grads


def _param_arrays(model: TaggerModel) -> dict[str, np.ndarray]:
    return {
        "embeddings": model.token_embeddings,
        "fwd_W": model.forward_cell.W, "fwd_U": model.forward_cell.U, "fwd_b": model.forward_cell.b,
        "bwd_W": model.backward_cell.W, "bwd_U": model.backward_cell.U, "bwd_b": model.backward_cell.b,
        "head_W": model.head_W, "head_b": model.head_b,
    }


def init_model(vocab_size: int, config: TaggerConfig, rng: np.random.Generator) -> TaggerModel:
    """Seeded initialization; the head starts at zero so an untrained model
    ties every class and falls back to label 0."""
    E, H = config.embed_dim, config.hidden_units
    k = 1.0 / np.sqrt(H)

    def cell() -> LstmCell:
        return LstmCell(
            W=rng.uniform(-k, k, size=(4 * H, E)),
            U=rng.uniform(-k, k, size=(4 * H, H)),
            b=np.zeros(4 * H),
        )

    return TaggerModel(
        token_embeddings=rng.uniform(-0.1, 0.1, size=(vocab_size, E)),
        forward_cell=cell(),
        backward_cell=cell(),
        head_W=np.zeros((N_TAGS, 2 * H)),
        head_b=np.zeros(N_TAGS),
        config=config,
    )


def tag_sentence(model: TaggerModel, seq: EncodedSequence) -> list[int]:
    """Per-position argmax labels for the real (non-padding) positions."""
    ids = np.asarray([seq.ids], dtype=np.int64)
    mask = np.asarray([seq.mask], dtype=np.float64)
    logits, _ = _bilstm_logits(model, ids, mask)
    picks = logits[0].argmax(axis=1)
    n_real = int(sum(seq.mask))
    return [int(p) for p in picks[:n_real]]


def _to_arrays(dataset) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    lengths = {len(seq.ids) for seq, _ in dataset}
    if len(lengths) != 1:
        raise LabelAlignmentError("all encoded sequences must share one padded length")
    T = lengths.pop()
    ids = np.zeros((len(dataset), T), dtype=np.int64)
    mask = np.zeros((len(dataset), T))
    labels = np.zeros((len(dataset), T), dtype=np.int64)
    for r, (seq, gold) in enumerate(dataset):
        n_real = int(sum(seq.mask))
        if len(gold) != n_real:
            raise LabelAlignmentError(
                f"row {r}: {len(gold)} labels for {n_real} real positions"
            )
        if any(g not in (0, 1, 2) for g in gold):
            raise LabelAlignmentError(f"row {r}: labels must be in {{0,1,2}}")
        ids[r] = seq.ids
        mask[r] = [1.0 if m else 0.0 for m in seq.mask]
        labels[r, :n_real] = gold
    return ids, mask, labels


class _Adam:
    def __init__(self, params: dict[str, np.ndarray], lr: float,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, grads: dict[str, np.ndarray]):
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for key, p in self.params.items():
            g = grads[key]
            self.m[key] = self.beta1 * self.m[key] + (1 - self.beta1) * g
            self.v[key] = self.beta2 * self.v[key] + (1 - self.beta2) * g * g
            p -= self.lr * (self.m[key] / b1c) / (np.sqrt(self.v[key] / b2c) + self.eps)


def _accuracy(model: TaggerModel, ids, mask, labels) -> float:
    logits, _ = _bilstm_logits(model, ids, mask)
    picks = logits.argmax(axis=2)
    hit = ((picks == labels) * mask).sum()
    return float(hit / mask.sum()) if mask.sum() else 0.0


def train_tagger(
    dataset, config: TaggerConfig, val_dataset=None, vocab_size: int | None = None
) -> tuple[TaggerModel, TrainingCurve]:
    """Mini-batch Adam training; deterministic per seed.

    The returned curve has one row per epoch; validation accuracy falls back
    to training accuracy when no validation set is supplied. `vocab_size`
    should be the encoding vocabulary's size; it is inferred from the data
    when omitted.
    """
    if not dataset:
        raise EmptyCorpus("empty tagger dataset")
    ids, mask, labels = _to_arrays(dataset)
    val = _to_arrays(val_dataset) if val_dataset else None
    if vocab_size is None:
        vocab_size = int(ids.max()) + 1
        if val is not None:
            vocab_size = max(vocab_size, int(val[0].max()) + 1)
    rng = np.random.default_rng(config.seed)
    model = init_model(vocab_size, config, rng)
    opt = _Adam(_param_arrays(model), lr=config.lr)
    curve = TrainingCurve()
    n = len(dataset)
    bs = config.batch_size
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for lo in range(0, n, bs):
            idx = order[lo : lo + bs]
            _, grads = tagger_loss_and_grads(model, ids[idx], mask[idx], labels[idx])
            opt.step(grads)
        train_acc = _accuracy(model, ids, mask, labels)
        val_acc = _accuracy(model, *val) if val is not None else train_acc
        curve.rows.append((epoch, train_acc, val_acc))
    return model, curve


def _runs(labels, value) -> list[tuple[int, int]]:
    runs = []
    start = None
    for i, lab in enumerate(labels):
        if lab == value and start is None:
            start = i
        elif lab != value and start is not None:
            runs.append((start, i))
            start = None
    if start is not None:
        runs.append((start, len(labels)))
    return runs


def extract_entities(tokens, labels) -> EntityPair:
    """Longest maximal run of each entity label wins; earliest breaks ties."""
    if len(tokens) != len(labels):
        raise LabelAlignmentError(f"{len(tokens)} tokens vs {len(labels)} labels")

    def best(value):
        runs = _runs(labels, value)
        if not runs:
            return None
        return max(runs, key=lambda r: (r[1] - r[0], -r[0]))

    return EntityPair(cause_span=best(1), effect_span=best(2))
