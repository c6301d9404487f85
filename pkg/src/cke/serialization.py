"""Single-file model container.

Layout: magic `CKE1`, a little-endian u32 header length, a canonical UTF-8
JSON header, then each declared matrix as little-endian float32, row-major,
in header order. Saving a loaded model reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .embedding_classifier import ClassifierConfig, DocVectorModel, EmbeddingClassifierModel
from .features import Vocabulary
from .linear_baselines import LinearModel
from .sequence_tagger import LstmCell, TaggerConfig, TaggerModel

__all__ = ["save_model", "load_model", "MAGIC"]

MAGIC = b"CKE1"


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def _vocab_to_dict(vocab: Vocabulary) -> dict:
    return {
        "word_to_index": vocab.word_to_index,
        "min_count": vocab.min_count,
        "n_gram_order": vocab.n_gram_order,
        "bucket_count": vocab.bucket_count,
        "counts": vocab.counts,
    }


def _vocab_from_dict(d: dict) -> Vocabulary:
    return Vocabulary(
        word_to_index=dict(d["word_to_index"]),
        min_count=d["min_count"],
        n_gram_order=d["n_gram_order"],
        bucket_count=d["bucket_count"],
        counts=dict(d.get("counts", {})),
    )


def _pack(kind: str, meta: dict, matrices: list[tuple[str, np.ndarray]]) -> bytes:
    header = {
        "kind": kind,
        "meta": meta,
        "matrices": [
            {"name": name, "rows": int(arr.shape[0]), "cols": int(arr.shape[1])}
            for name, arr in matrices
        ],
    }
    head = _canonical(header)
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<I", len(head))
    blob += head
    for _, arr in matrices:
        blob += np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return bytes(blob)


def _as_matrix(arr: np.ndarray) -> np.ndarray:
    a = np.asarray(arr)
    return a.reshape(1, -1) if a.ndim == 1 else a


def _model_payload(model, extras: dict):
    if isinstance(model, EmbeddingClassifierModel):
        meta = {
            "config": model.config.__dict__,
            "labels": model.labels,
            "label_counts": model.label_counts,
            "vocab": _vocab_to_dict(model.vocab),
        }
        mats = [
            ("input_embeddings", model.input_embeddings),
            ("output_weights", model.output_weights),
        ]
        return "embedding_classifier", meta, mats
    if isinstance(model, LinearModel):
        meta = {"model_kind": model.kind, "l2": model.l2}
        if "vocab" in extras:
            meta["vocab"] = _vocab_to_dict(extras.pop("vocab"))
        mats = [
            ("weights", _as_matrix(model.weights)),
            ("bias", np.array([[model.bias]])),
        ]
        return "linear", meta, mats
    if isinstance(model, TaggerModel):
        meta = {"config": model.config.__dict__}
        if "vocab" in extras:
            meta["vocab"] = _vocab_to_dict(extras.pop("vocab"))
        mats = [
            ("token_embeddings", model.token_embeddings),
            ("fwd_W", model.forward_cell.W),
            ("fwd_U", model.forward_cell.U),
            ("fwd_b", _as_matrix(model.forward_cell.b)),
            ("bwd_W", model.backward_cell.W),
            ("bwd_U", model.backward_cell.U),
            ("bwd_b", _as_matrix(model.backward_cell.b)),
            ("head_W", model.head_W),
            ("head_b", _as_matrix(model.head_b)),
        ]
        return "tagger", meta, mats
    if isinstance(model, DocVectorModel):
        meta = {
            "dim": model.dim,
            "word_to_index": model.word_to_index,
            "word_counts": model.word_counts,
            "neg_samples": model.neg_samples,
        }
        mats = [
            ("doc_vectors", model.doc_vectors),
            ("context_weights", model.context_weights),
        ]
        return "doc_vectors", meta, mats
    raise TypeError(f"cannot serialize {type(model).__name__}")


def save_model(path: str | Path | None, model, **extras) -> bytes:
    """Serialize a model (optionally straight to `path`) and return the bytes.

    A tagger may carry its encoding vocabulary via `vocab=`.
    """
    kind, meta, mats = _model_payload(model, dict(extras))
    blob = _pack(kind, meta, mats)
    if path is not None:
        Path(path).write_bytes(blob)
    return blob


def _read_matrices(buf: bytes, offset: int, declared: list[dict]) -> dict[str, np.ndarray]:
    out = {}
    for spec in declared:
        n = spec["rows"] * spec["cols"]
        end = offset + 4 * n
        arr = np.frombuffer(buf[offset:end], dtype="<f4").astype(np.float64)
        out[spec["name"]] = arr.reshape(spec["rows"], spec["cols"])
        offset = end
    if offset != len(buf):
        raise ValueError("trailing bytes after declared matrices")
    return out


def load_model(source: str | Path | bytes) -> tuple[str, object, dict]:
    """Parse a container; returns (kind, model, extras).

    Matrices come back as float64 copies of the stored float32 values, so a
    save/load/save cycle is byte-stable.
    """
    buf = source if isinstance(source, bytes) else Path(source).read_bytes()
    if buf[:4] != MAGIC:
        raise ValueError("not a CKE1 container")
    (head_len,) = struct.unpack("<I", buf[4:8])
    header = json.loads(buf[8 : 8 + head_len].decode("utf-8"))
    mats = _read_matrices(buf, 8 + head_len, header["matrices"])
    kind = header["kind"]
    meta = header["meta"]
    extras: dict = {}

    if kind == "embedding_classifier":
        model: object = EmbeddingClassifierModel(
            vocab=_vocab_from_dict(meta["vocab"]),
            input_embeddings=mats["input_embeddings"],
            output_weights=mats["output_weights"],
            labels=list(meta["labels"]),
            config=ClassifierConfig(**meta["config"]),
            label_counts={k: int(v) for k, v in meta["label_counts"].items()},
        )
    elif kind == "linear":
        model = LinearModel(
            weights=mats["weights"].ravel(),
            bias=float(mats["bias"][0, 0]),
            kind=meta["model_kind"],
            l2=meta["l2"],
        )
        if "vocab" in meta:
            extras["vocab"] = _vocab_from_dict(meta["vocab"])
    elif kind == "tagger":
        model = TaggerModel(
            token_embeddings=mats["token_embeddings"],
            forward_cell=LstmCell(mats["fwd_W"], mats["fwd_U"], mats["fwd_b"].ravel()),
            backward_cell=LstmCell(mats["bwd_W"], mats["bwd_U"], mats["bwd_b"].ravel()),
            head_W=mats["head_W"],
            head_b=mats["head_b"].ravel(),
            config=TaggerConfig(**meta["config"]),
        )
        if "vocab" in meta:
            extras["vocab"] = _vocab_from_dict(meta["vocab"])
    elif kind == "doc_vectors":
        model = DocVectorModel(
            doc_vectors=mats["doc_vectors"],
            context_weights=mats["context_weights"],
            dim=meta["dim"],
            word_to_index=dict(meta["word_to_index"]),
            word_counts={k: int(v) for k, v in meta["word_counts"].items()},
            neg_samples=meta["neg_samples"],
        )
    else:
        raise ValueError(f"unknown container kind {kind!r}")
    return kind, model, extras
