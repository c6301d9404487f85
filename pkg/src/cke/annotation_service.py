"""Human screening/annotation loop: an append-only JSONL store of judgment
revisions with replay semantics, dataset exports, and the HTTP API the
annotation client talks to.

Records move pending -> screened -> annotated and never backward; every
accepted judgment appends a full-record revision, so the current view is
always reconstructible by replaying the log.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .corpus import Candidate, Sentence, corpus_stats
from .errors import (
    CkeError,
    EmptyExport,
    InvalidJudgment,
    InvalidSpan,
    NotFound,
)
from .features import mask_nodes, tokenize

__all__ = [
    "HypothesisRecord",
    "AnnotationStore",
    "parse_dataset",
    "replay_records",
    "create_app",
    "STATUS_ORDER",
]

PENDING, SCREENED, ANNOTATED = "pending", "screened", "annotated"
STATUS_ORDER = {PENDING: 0, SCREENED: 1, ANNOTATED: 2}

DIRECTIONS = ("positive", "negative", "nonlinear")
CAUSALITIES = ("causal", "associative")

_ANNOTATION_KEYS = ("node1_span", "node2_span", "direction", "causality")


@dataclass(frozen=True)
class HypothesisRecord:
    sentence_id: str
    status: str = PENDING
    is_hypothesis: bool | None = None
    node1_span: tuple[int, int] | None = None
    node2_span: tuple[int, int] | None = None
    direction: str | None = None
    causality: str | None = None
    annotator: str = ""
    timestamp: str = ""

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "status": self.status,
            "is_hypothesis": self.is_hypothesis,
            "node1_span": list(self.node1_span) if self.node1_span else None,
            "node2_span": list(self.node2_span) if self.node2_span else None,
            "direction": self.direction,
            "causality": self.causality,
            "annotator": self.annotator,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, d: dict) -> HypothesisRecord:
        return cls(
            sentence_id=d["sentence_id"],
            status=d["status"],
            is_hypothesis=d.get("is_hypothesis"),
            node1_span=tuple(d["node1_span"]) if d.get("node1_span") else None,
            node2_span=tuple(d["node2_span"]) if d.get("node2_span") else None,
            direction=d.get("direction"),
            causality=d.get("causality"),
            annotator=d.get("annotator", ""),
            timestamp=d.get("timestamp", ""),
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _check_span(span, text: str, name: str) -> tuple[int, int]:
    try:
        s, e = int(span[0]), int(span[1])
    except (TypeError, ValueError, IndexError):
        raise InvalidJudgment(f"{name} must be a [start, end] pair") from None
    if not (0 <= s < e <= len(text)):
        raise InvalidSpan(f"{name} ({s}, {e}) outside sentence of length {len(text)}")
    return s, e


def replay_records(path: str | Path) -> dict[str, HypothesisRecord]:
    """Fold the revision log into the latest-revision-per-sentence view."""
    view: dict[str, HypothesisRecord] = {}
    p = Path(path)
    if not p.exists():
        return view
    for line in p.read_text("utf-8").splitlines():
        if line.strip():
            rec = HypothesisRecord.from_dict(json.loads(line))
            view[rec.sentence_id] = rec
    return view


class AnnotationStore:
    """Queue, judgments, and exports over an append-only revision log.

    With `records_path` set, every accepted revision is appended to that
    JSONL file and sentences go to a sidecar file next to it, so a restarted
    store replays to the same state. Writes are serialized by a lock.
    """

    def __init__(self, records_path: str | Path | None = None,
                 sentences_path: str | Path | None = None):
        self.records_path = Path(records_path) if records_path else None
        if sentences_path is None and self.records_path is not None:
            sentences_path = self.records_path.with_suffix(".sentences.jsonl")
        self.sentences_path = Path(sentences_path) if sentences_path else None
        self._lock = threading.RLock()
        self.sentences: dict[str, Sentence] = {}
        self.markers: dict[str, tuple[str, tuple[int, int]]] = {}
        self.records: dict[str, HypothesisRecord] = {}
        self.log: list[HypothesisRecord] = []
        self._load()

    # -- persistence ------------------------------------------------------

    def _load(self):
        if self.sentences_path and self.sentences_path.exists():
            for line in self.sentences_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                d = json.loads(line)
                sent = Sentence(
                    sentence_id=d["sentence_id"],
                    doc_id=d["doc_id"],
                    text=d["text"],
                    char_span=tuple(d["char_span"]),
                    word_count=d["word_count"],
                )
                self.sentences[sent.sentence_id] = sent
                if d.get("marker"):
                    self.markers[sent.sentence_id] = (d["marker"], tuple(d["marker_span"]))
        if self.records_path and self.records_path.exists():
            for line in self.records_path.read_text("utf-8").splitlines():
                if line.strip():
                    rec = HypothesisRecord.from_dict(json.loads(line))
                    self.log.append(rec)
                    self.records[rec.sentence_id] = rec

    def _append_sentence_row(self, sent: Sentence, marker=None):
        if self.sentences_path is None:
            return
        row = {
            "sentence_id": sent.sentence_id,
            "doc_id": sent.doc_id,
            "text": sent.text,
            "char_span": list(sent.char_span),
            "word_count": sent.word_count,
            "marker": marker[0] if marker else None,
            "marker_span": list(marker[1]) if marker else None,
        }
        with self.sentences_path.open("a", encoding="utf-8") as fh:
            fh.write(json.dumps(row, sort_keys=True) + "\n")

    def _append_record(self, rec: HypothesisRecord):
        self.log.append(rec)
        self.records[rec.sentence_id] = rec
        if self.records_path is not None:
            with self.records_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")

    # -- ingestion ---------------------------------------------------------

    def add_sentences(self, sentences: list[Sentence]) -> int:
        """Register segmented sentences (the negatives pool for exports)."""
        with self._lock:
            added = 0
            for sent in sentences:
                if sent.sentence_id not in self.sentences:
                    self.sentences[sent.sentence_id] = sent
                    self._append_sentence_row(sent)
                    added += 1
            return added

    def enqueue_candidates(self, candidates: list[Candidate]) -> int:
        """Queue marker matches for screening; duplicates are ignored."""
        with self._lock:
            added = 0
            for cand in candidates:
                sid = cand.sentence.sentence_id
                if sid in self.records:
                    continue
                if sid not in self.sentences:
                    self.sentences[sid] = cand.sentence
                    self._append_sentence_row(cand.sentence, (cand.marker, cand.marker_span))
                self.markers[sid] = (cand.marker, cand.marker_span)
                self._append_record(
                    HypothesisRecord(sentence_id=sid, status=PENDING, timestamp=_now())
                )
                added += 1
            return added

    # -- queue -------------------------------------------------------------

    def next_batch(self, stage: str, limit: int) -> list[tuple[Sentence, HypothesisRecord]]:
        if limit < 1:
            raise ValueError("limit must be >= 1")
        if stage == "screening":
            want = lambda r: r.status == PENDING
        elif stage == "annotation":
            want = lambda r: r.status == SCREENED and r.is_hypothesis is True
        else:
            raise ValueError(f"unknown stage {stage!r}")
        with self._lock:
            out = []
            for sid, rec in self.records.items():
                if want(rec):
                    out.append((self.sentences[sid], rec))
                    if len(out) == limit:
                        break
            return out

    def progress(self) -> dict[str, int]:
        with self._lock:
            counts = {PENDING: 0, SCREENED: 0, ANNOTATED: 0}
            for rec in self.records.values():
                counts[rec.status] += 1
            counts["total"] = len(self.records)
            return counts

    # -- judgments ----------------------------------------------------------

    def submit_label(self, sentence_id: str, judgment: dict) -> HypothesisRecord:
        """Apply a screening or annotation judgment as a new revision.

        Screening judgments carry `is_hypothesis`; annotation judgments carry
        all of node1_span/node2_span/direction/causality. A record screened
        as non-hypothesis is terminal.
        """
        with self._lock:
            rec = self.records.get(sentence_id)
            if rec is None:
                raise NotFound(f"unknown sentence_id {sentence_id!r}")
            sent = self.sentences[sentence_id]
            has_screen = "is_hypothesis" in judgment
            has_annot = any(k in judgment for k in _ANNOTATION_KEYS)
            if has_screen and has_annot:
                raise InvalidJudgment("judgment mixes screening and annotation fields")
            annotator = str(judgment.get("annotator", ""))
            ts = str(judgment.get("timestamp") or _now())

            if has_screen:
                if rec.status == ANNOTATED:
                    raise InvalidJudgment("cannot re-screen an annotated record")
                value = judgment["is_hypothesis"]
                if not isinstance(value, bool):
                    raise InvalidJudgment("is_hypothesis must be a boolean")
                new = replace(
                    rec, status=SCREENED, is_hypothesis=value,
                    annotator=annotator, timestamp=ts,
                )
            elif has_annot:
                missing = [k for k in _ANNOTATION_KEYS if k not in judgment]
                if missing:
                    raise InvalidJudgment(f"annotation judgment missing {missing}")
                if rec.status == PENDING:
                    raise InvalidJudgment("record must be screened before annotation")
                if rec.is_hypothesis is not True:
                    raise InvalidJudgment("only screened-true records can be annotated")
                if judgment["direction"] not in DIRECTIONS:
                    raise InvalidJudgment(f"direction must be one of {DIRECTIONS}")
                if judgment["causality"] not in CAUSALITIES:
                    raise InvalidJudgment(f"causality must be one of {CAUSALITIES}")
                n1 = _check_span(judgment["node1_span"], sent.text, "node1_span")
                n2 = _check_span(judgment["node2_span"], sent.text, "node2_span")
                if n1[0] < n2[1] and n2[0] < n1[1]:
                    raise InvalidSpan("node spans overlap")
                new = replace(
                    rec, status=ANNOTATED, node1_span=n1, node2_span=n2,
                    direction=judgment["direction"], causality=judgment["causality"],
                    annotator=annotator, timestamp=ts,
                )
            else:
                raise InvalidJudgment("judgment carries no recognized fields")
            assert STATUS_ORDER[new.status] >= STATUS_ORDER[rec.status]
            self._append_record(new)
            return new

    # -- exports -------------------------------------------------------------

    def _annotated(self) -> list[HypothesisRecord]:
        return [r for r in self.records.values() if r.status == ANNOTATED]

    def _tagging_rows(self):
        rows = []
        for rec in self._annotated():
            sent = self.sentences[rec.sentence_id]
            tokens = tokenize(sent.text)
            labels = []
            for tok in tokens:
                s, e = tok.char_span
                if rec.node1_span and s < rec.node1_span[1] and rec.node1_span[0] < e:
                    labels.append(1)
                elif rec.node2_span and s < rec.node2_span[1] and rec.node2_span[0] < e:
                    labels.append(2)
                else:
                    labels.append(0)
            rows.append((rec, sent, [t.surface for t in tokens], labels))
        return rows

    def export_dataset(self, kind: str, format: str = "jsonl", seed: int = 42) -> str:
        """Serialize a training dataset out of the current view.

        hypothesis_cls balances screened-true positives with a seeded draw of
        never-enqueued sentences; causality_cls applies node masking;
        tagging emits 0/1/2 token labels. TSV for annotated records uses the
        sentence/node1/node2/direction/causality column shape.
        """
        if format not in ("jsonl", "tsv"):
            raise ValueError(f"unknown format {format!r}")
        with self._lock:
            if kind == "hypothesis_cls":
                pos = [
                    (sid, self.sentences[sid].text)
                    for sid, rec in self.records.items()
                    if rec.is_hypothesis is True
                ]
                if not pos:
                    raise EmptyExport("no screened-true records")
                pool = [s for s in self.sentences.values() if s.sentence_id not in self.records]
                rng = np.random.default_rng(seed)
                take = rng.permutation(len(pool))[: len(pos)]
                neg = [(pool[i].sentence_id, pool[i].text) for i in sorted(take)]
                rows = [
                    {"sentence_id": sid, "text": text, "label": "hypothesis"}
                    for sid, text in pos
                ] + [
                    {"sentence_id": sid, "text": text, "label": "non_hypothesis"}
                    for sid, text in neg
                ]
                if format == "jsonl":
                    return "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
                lines = ["sentence\tlabel"]
                lines += [f"{r['text']}\t{r['label']}" for r in rows]
                return "\n".join(lines) + "\n"

            if kind == "causality_cls":
                annotated = self._annotated()
                if not annotated:
                    raise EmptyExport("no annotated records")
                if format == "jsonl":
                    rows = []
                    for rec in annotated:
                        sent = self.sentences[rec.sentence_id]
                        masked = mask_nodes(sent, rec.node1_span, rec.node2_span)
                        rows.append(
                            {"sentence_id": rec.sentence_id, "text": masked, "label": rec.causality}
                        )
                    return "\n".join(json.dumps(r, sort_keys=True) for r in rows) + "\n"
                return self._annotated_tsv(annotated)

            if kind == "tagging":
                rows = self._tagging_rows()
                if not rows:
                    raise EmptyExport("no annotated records")
                if format == "jsonl":
                    return (
                        "\n".join(
                            json.dumps(
                                {"sentence_id": rec.sentence_id, "tokens": toks, "labels": labs},
                                sort_keys=True,
                            )
                            for rec, _, toks, labs in rows
                        )
                        + "\n"
                    )
                return self._annotated_tsv([rec for rec, *_ in rows])

            raise ValueError(f"unknown export kind {kind!r}")

    def _annotated_tsv(self, annotated: list[HypothesisRecord]) -> str:
        lines = ["sentence\tnode1\tnode2\tdirection\tcausality"]
        for rec in annotated:
            text = self.sentences[rec.sentence_id].text
            node1 = text[rec.node1_span[0] : rec.node1_span[1]]
            node2 = text[rec.node2_span[0] : rec.node2_span[1]]
            flat = text.replace("\t", " ").replace("\n", " ")
            lines.append(f"{flat}\t{node1}\t{node2}\t{rec.direction}\t{rec.causality}")
        return "\n".join(lines) + "\n"

    def stats(self):
        return corpus_stats(list(self.sentences.values()), list(self.records.values()))


def parse_dataset(kind: str, payload: str) -> list:
    """Parse a JSONL export back into training examples (the ingest half of
    the export/ingest round trip)."""
    rows = [json.loads(line) for line in payload.splitlines() if line.strip()]
    if kind in ("hypothesis_cls", "causality_cls"):
        return [(r["text"], r["label"]) for r in rows]
    if kind == "tagging":
        return [(list(r["tokens"]), list(r["labels"])) for r in rows]
    raise ValueError(f"unknown dataset kind {kind!r}")


# --- HTTP API ------------------------------------------------------------------


def create_app(store: AnnotationStore):
    """FastAPI wrapper exposing the store; errors map to 400/404 bodies."""
    from fastapi import Body, FastAPI, Request
    from fastapi.responses import JSONResponse, PlainTextResponse

    from .corpus import clean_text, extract_candidates, load_document, segment_sentences

    app = FastAPI(title="cke annotation service")
    app.state.store = store

    @app.exception_handler(CkeError)
    async def _cke_error(request: Request, exc: CkeError):
        status = 404 if isinstance(exc, NotFound) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "detail": str(exc)},
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"error": "ValueError", "detail": str(exc)}
        )

    @app.post("/api/documents")
    def ingest_document(payload: dict = Body(...)):
        text = payload.get("text", "")
        doc_id = payload.get("doc_id") or f"doc-{len({s.doc_id for s in store.sentences.values()}) + 1}"
        doc = clean_text(load_document(doc_id, text))
        sentences = segment_sentences(doc)
        candidates = extract_candidates(sentences)
        # enqueue first so candidate rows persist with their markers
        added = store.enqueue_candidates(candidates)
        store.add_sentences(sentences)
        return {
            "doc_id": doc_id,
            "n_sentences": len(sentences),
            "n_candidates": len(candidates),
            "n_enqueued": added,
        }

    @app.get("/api/queue")
    def queue(stage: str = "screening", limit: int = 20):
        batch = store.next_batch(stage, limit)
        items = []
        for sent, rec in batch:
            marker = store.markers.get(sent.sentence_id)
            items.append(
                {
                    "sentence_id": sent.sentence_id,
                    "text": sent.text,
                    "marker": marker[0] if marker else None,
                    "marker_span": list(marker[1]) if marker else None,
                    "status": rec.status,
                    "is_hypothesis": rec.is_hypothesis,
                }
            )
        return {"stage": stage, "items": items, "progress": store.progress()}

    @app.post("/api/labels/{sentence_id}")
    def label(sentence_id: str, judgment: dict = Body(...)):
        rec = store.submit_label(sentence_id, judgment)
        return rec.to_dict()

    @app.get("/api/export")
    def export(kind: str, format: str = "jsonl", seed: int = 42):
        return PlainTextResponse(store.export_dataset(kind, format, seed))

    @app.get("/api/stats")
    def stats():
        return store.stats().to_dict()

    return app
