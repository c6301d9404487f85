"""Drive the annotation service end to end: ingest a document over HTTP,
screen and annotate the queue, then export the three training datasets.

Run: python3 demos/06_annotation_loop.py
(Uses an in-process test client; `cke serve --store records.jsonl` runs the
same app on a real port.)
"""

import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from cke.annotation_service import AnnotationStore, create_app, replay_records

DOCUMENT = """\
H1. Knowledge sharing is positively associated with innovation output.
We collected panel data from 180 manufacturing firms.
Hypothesis 2: Management commitment increases employee retention.
The estimates were significant across all regression models.
"""

store_path = Path(tempfile.mkdtemp()) / "records.jsonl"
store = AnnotationStore(store_path)
client = TestClient(create_app(store))

resp = client.post("/api/documents", json={"doc_id": "demo", "text": DOCUMENT})
print("ingested:", resp.json())

queue = client.get("/api/queue", params={"stage": "screening", "limit": 10}).json()
print("\nscreening queue:")
for item in queue["items"]:
    print(f"  {item['sentence_id']}: marker={item['marker']!r} :: {item['text']}")

# screen everything as a true hypothesis, then annotate the node spans
annotations = {
    "demo:0": ("Knowledge sharing", "innovation output", "positive", "associative"),
    "demo:2": ("Management commitment", "employee retention", "positive", "causal"),
}
for item in queue["items"]:
    sid = item["sentence_id"]
    client.post(f"/api/labels/{sid}", json={"is_hypothesis": True, "annotator": "demo"})
    node1, node2, direction, causality = annotations[sid]
    text = item["text"]
    s1, s2 = text.index(node1), text.index(node2)
    resp = client.post(
        f"/api/labels/{sid}",
        json={
            "node1_span": [s1, s1 + len(node1)],
            "node2_span": [s2, s2 + len(node2)],
            "direction": direction,
            "causality": causality,
            "annotator": "demo",
        },
    )
    print(f"annotated {sid}: status={resp.json()['status']}")

print("\nprogress:", client.get("/api/queue").json()["progress"])

for kind in ("hypothesis_cls", "causality_cls", "tagging"):
    payload = client.get("/api/export", params={"kind": kind}).text
    print(f"\n--- export {kind} ---")
    print(payload.rstrip())

print("\n--- export causality_cls as TSV (the annotation schema shape) ---")
print(client.get("/api/export", params={"kind": "causality_cls", "format": "tsv"}).text.rstrip())

print("\nstats:", client.get("/api/stats").json())

# the JSONL log replays to exactly the live state
view = replay_records(store_path)
assert view == store.records
print(f"\nreplayed {store_path.name}: {len(view)} records, matches live store.")
