from __future__ import annotations

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from cke.annotation_service import (
    STATUS_ORDER,
    AnnotationStore,
    create_app,
    parse_dataset,
    replay_records,
)
from cke.corpus import clean_text, extract_candidates, load_document, segment_sentences
from cke.errors import EmptyExport, InvalidJudgment, InvalidSpan, NotFound

from conftest import PAPER_EXAMPLE

DOC_TEXT = (
    PAPER_EXAMPLE + "\n"
    "The data were collected from large firms. Hypothesis 2: Trust reduces conflict.\n"
    "We estimate a regression model with industry effects. Results are reported in the appendix.\n"
    "H3. Knowledge sharing increases product quality. The sample covers twelve years of filings.\n"
)


def fresh_store(tmp_path=None):
    store = AnnotationStore(tmp_path / "records.jsonl" if tmp_path else None)
    doc = clean_text(load_document("d1", DOC_TEXT))
    sentences = segment_sentences(doc)
    candidates = extract_candidates(sentences)
    store.enqueue_candidates(candidates)
    store.add_sentences(sentences)
    return store, sentences, candidates


def screen(store, sid, value=True, annotator="ann"):
    return store.submit_label(sid, {"is_hypothesis": value, "annotator": annotator})


def annotate(store, sid, n1, n2, direction="positive", causality="associative"):
    return store.submit_label(
        sid,
        {
            "node1_span": list(n1),
            "node2_span": list(n2),
            "direction": direction,
            "causality": causality,
            "annotator": "ann",
        },
    )


# --- enqueue / batches -------------------------------------------------------------


def test_enqueue_counts_and_idempotence(tmp_path):
    store, sentences, candidates = fresh_store(tmp_path)
    assert len(candidates) == 3
    assert store.enqueue_candidates(candidates) == 0  # all duplicates
    assert store.progress()["pending"] == 3


def test_enqueue_mixed_new_and_duplicate(tmp_path):
    store, sentences, candidates = fresh_store(tmp_path)
    extra_doc = clean_text(load_document("d2", "H9. Slack buffers shocks. Plain filler text."))
    extra = extract_candidates(segment_sentences(extra_doc))
    assert store.enqueue_candidates(candidates + extra) == len(extra)


def test_screening_batch_is_fifo(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    batch = store.next_batch("screening", 10)
    assert [s.sentence_id for s, _ in batch] == [c.sentence.sentence_id for c in candidates]
    assert store.next_batch("screening", 2) == batch[:2]


def test_annotation_batch_filters_screened_true(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    ids = [c.sentence.sentence_id for c in candidates]
    screen(store, ids[0], True)
    screen(store, ids[1], False)
    screen(store, ids[2], True)
    batch = store.next_batch("annotation", 10)
    assert [s.sentence_id for s, _ in batch] == [ids[0], ids[2]]


def test_drained_queues(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    for c in candidates:
        screen(store, c.sentence.sentence_id, False)
    assert store.next_batch("screening", 5) == []
    assert store.next_batch("annotation", 5) == []


# --- submit_label state machine ------------------------------------------------------


def test_paper_example_screen_then_annotate(tmp_path):
    store, sentences, candidates = fresh_store(tmp_path)
    sid = candidates[0].sentence.sentence_id
    text = candidates[0].sentence.text
    rec = screen(store, sid, True)
    assert rec.status == "screened"
    n1 = (text.index("Commitment"), text.index("Commitment") + len("Commitment configuration"))
    n2 = (text.index("firm"), text.index("firm") + len("firm performance"))
    rec = annotate(store, sid, n1, n2, "positive", "associative")
    assert rec.status == "annotated"
    assert rec.direction == "positive"
    assert rec.causality == "associative"


def test_annotating_pending_record_rejected(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    with pytest.raises(InvalidJudgment):
        annotate(store, candidates[0].sentence.sentence_id, (0, 2), (3, 5))


def test_annotating_screened_false_rejected(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    sid = candidates[0].sentence.sentence_id
    screen(store, sid, False)
    with pytest.raises(InvalidJudgment):
        annotate(store, sid, (0, 2), (3, 5))


def test_rescreening_annotated_rejected(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    sid = candidates[0].sentence.sentence_id
    screen(store, sid, True)
    annotate(store, sid, (0, 2), (4, 6))
    with pytest.raises(InvalidJudgment):
        screen(store, sid, False)


def test_unknown_sentence_id(tmp_path):
    store, *_ = fresh_store(tmp_path)
    with pytest.raises(NotFound):
        screen(store, "ghost:0")


def test_span_validation(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    sid = candidates[0].sentence.sentence_id
    screen(store, sid, True)
    with pytest.raises(InvalidSpan):
        annotate(store, sid, (0, 5), (3, 8))  # overlap
    with pytest.raises(InvalidSpan):
        annotate(store, sid, (0, 5), (10, 9999))  # out of range
    with pytest.raises(InvalidJudgment):
        store.submit_label(sid, {"node1_span": [0, 2], "direction": "positive"})
    with pytest.raises(InvalidJudgment):
        annotate(store, sid, (0, 2), (4, 6), direction="sideways")


def test_revisions_append_not_overwrite(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    sid = candidates[0].sentence.sentence_id
    screen(store, sid, False)
    screen(store, sid, True)  # corrected judgment, still screened
    revisions = [r for r in store.log if r.sentence_id == sid]
    assert [r.status for r in revisions] == ["pending", "screened", "screened"]
    assert store.records[sid].is_hypothesis is True


def test_replay_reconstructs_view(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    ids = [c.sentence.sentence_id for c in candidates]
    screen(store, ids[0], True)
    annotate(store, ids[0], (0, 2), (4, 6), "negative", "causal")
    screen(store, ids[1], False)
    view = replay_records(tmp_path / "records.jsonl")
    assert view == store.records


def test_restarted_store_equals_live_store(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    screen(store, candidates[0].sentence.sentence_id, True)
    reloaded = AnnotationStore(tmp_path / "records.jsonl")
    assert reloaded.records == store.records
    assert set(reloaded.sentences) == set(store.sentences)
    assert reloaded.markers == store.markers


def test_randomized_state_machine_never_regresses(tmp_path):
    store, _, candidates = fresh_store(tmp_path)
    rng = np.random.default_rng(0)
    ids = [c.sentence.sentence_id for c in candidates]
    history = {sid: store.records[sid].status for sid in ids}
    for _ in range(2000):
        sid = ids[int(rng.integers(len(ids)))]
        action = rng.random()
        try:
            if action < 0.5:
                screen(store, sid, bool(rng.random() < 0.5))
            else:
                annotate(store, sid, (0, 2), (4, 6))
        except (InvalidJudgment, InvalidSpan):
            pass
        new = store.records[sid].status
        assert STATUS_ORDER[new] >= STATUS_ORDER[history[sid]]
        history[sid] = new
    assert replay_records(tmp_path / "records.jsonl") == store.records


# --- exports -----------------------------------------------------------------------------


def _annotated_store(tmp_path):
    store, sentences, candidates = fresh_store(tmp_path)
    for cand in candidates:
        sid = cand.sentence.sentence_id
        text = cand.sentence.text
        screen(store, sid, True)
        words = text.split()
        n1 = (text.index(words[1]), text.index(words[1]) + len(words[1]))
        tail = words[-1].rstrip(".")
        start = text.rindex(tail)
        n2 = (start, start + len(tail))
        annotate(store, sid, n1, n2, "positive", "causal" if sid.endswith("0") else "associative")
    return store, sentences, candidates


def test_balanced_hypothesis_export(tmp_path):
    store, sentences, candidates = _annotated_store(tmp_path)
    rows = [json.loads(l) for l in store.export_dataset("hypothesis_cls").splitlines()]
    pos = [r for r in rows if r["label"] == "hypothesis"]
    neg = [r for r in rows if r["label"] == "non_hypothesis"]
    assert len(pos) == 3
    assert abs(len(pos) - len(neg)) <= 1
    queued = {c.sentence.sentence_id for c in candidates}
    assert all(r["sentence_id"] not in queued for r in neg)


def test_negative_draw_is_seeded(tmp_path):
    store, *_ = _annotated_store(tmp_path)
    assert store.export_dataset("hypothesis_cls", seed=5) == store.export_dataset(
        "hypothesis_cls", seed=5
    )


def test_causality_export_masks_nodes(tmp_path):
    store, *_ = _annotated_store(tmp_path)
    rows = [json.loads(l) for l in store.export_dataset("causality_cls").splitlines()]
    for r in rows:
        assert r["text"].count("node1") == 1
        assert r["text"].count("node2") == 1
        assert r["label"] in ("causal", "associative")


def test_tagging_export_labels(tmp_path):
    store, *_ = _annotated_store(tmp_path)
    rows = [json.loads(l) for l in store.export_dataset("tagging").splitlines()]
    for r in rows:
        assert len(r["tokens"]) == len(r["labels"])
        assert set(r["labels"]) <= {0, 1, 2}
        assert 1 in r["labels"] and 2 in r["labels"]


def test_tsv_export_has_schema_columns(tmp_path):
    store, *_ = _annotated_store(tmp_path)
    lines = store.export_dataset("causality_cls", format="tsv").splitlines()
    assert lines[0] == "sentence\tnode1\tnode2\tdirection\tcausality"
    assert all(len(l.split("\t")) == 5 for l in lines[1:])


def test_empty_export(tmp_path):
    store = AnnotationStore(tmp_path / "r.jsonl")
    with pytest.raises(EmptyExport):
        store.export_dataset("hypothesis_cls")


def test_parse_dataset_round_trip(tmp_path):
    store, *_ = _annotated_store(tmp_path)
    payload = store.export_dataset("causality_cls")
    examples = parse_dataset("causality_cls", payload)
    assert all(isinstance(t, str) and lab in ("causal", "associative") for t, lab in examples)
    tag_rows = parse_dataset("tagging", store.export_dataset("tagging"))
    assert all(len(t) == len(l) for t, l in tag_rows)


# --- HTTP API -------------------------------------------------------------------------------


@pytest.fixture()
def client(tmp_path):
    store = AnnotationStore(tmp_path / "records.jsonl")
    return TestClient(create_app(store)), store


def test_document_ingestion_endpoint(client):
    http, store = client
    resp = http.post("/api/documents", json={"doc_id": "d1", "text": DOC_TEXT})
    assert resp.status_code == 200
    body = resp.json()
    assert body["n_candidates"] == 3
    assert body["n_enqueued"] == 3
    assert body["n_sentences"] == 7


def test_queue_endpoint_shows_markers(client):
    http, _ = client
    http.post("/api/documents", json={"doc_id": "d1", "text": DOC_TEXT})
    resp = http.get("/api/queue", params={"stage": "screening", "limit": 2})
    body = resp.json()
    assert len(body["items"]) == 2
    assert body["items"][0]["marker"] == "H1"
    assert body["progress"]["pending"] == 3


def test_label_endpoint_flow_and_errors(client):
    http, _ = client
    http.post("/api/documents", json={"doc_id": "d1", "text": DOC_TEXT})
    sid = http.get("/api/queue").json()["items"][0]["sentence_id"]

    resp = http.post(f"/api/labels/{sid}", json={"node1_span": [0, 2], "node2_span": [3, 5],
                                                 "direction": "positive", "causality": "causal"})
    assert resp.status_code == 400
    assert set(resp.json()) == {"error", "detail"}

    resp = http.post(f"/api/labels/{sid}", json={"is_hypothesis": True})
    assert resp.status_code == 200
    assert resp.json()["status"] == "screened"

    resp = http.post("/api/labels/ghost", json={"is_hypothesis": True})
    assert resp.status_code == 404
    assert resp.json()["error"] == "NotFound"


def test_export_and_stats_endpoints(client):
    http, _ = client
    http.post("/api/documents", json={"doc_id": "d1", "text": DOC_TEXT})
    for item in http.get("/api/queue", params={"limit": 10}).json()["items"]:
        http.post(f"/api/labels/{item['sentence_id']}", json={"is_hypothesis": True})
    resp = http.get("/api/export", params={"kind": "hypothesis_cls"})
    assert resp.status_code == 200
    assert all(json.loads(l)["label"] in ("hypothesis", "non_hypothesis")
               for l in resp.text.splitlines())
    resp = http.get("/api/stats")
    assert resp.status_code == 200
    assert resp.json()["n_hypotheses"] == 3


def test_empty_document_maps_to_400(client):
    http, _ = client
    resp = http.post("/api/documents", json={"doc_id": "x", "text": ""})
    assert resp.status_code == 400
    assert resp.json()["error"] == "EmptyDocument"


def test_bad_stage_maps_to_400(client):
    http, _ = client
    assert http.get("/api/queue", params={"stage": "nonsense"}).status_code == 400
