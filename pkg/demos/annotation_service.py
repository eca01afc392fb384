"""
Driving the annotation service
==============================

Spins the HTTP app up against a scratch run store and walks one blinded
comparison through it: two annotators fetch the same pair in privately
shuffled order, submit judgments in the order they saw, and the stats
endpoint reports agreement over the canonical stored values.
"""

import tempfile
from pathlib import Path

from starlette.testclient import TestClient

from ideaforge.service import ANNOTATION_CRITERIA, create_app
from ideaforge.store import RunStore
from ideaforge.testing import build_sample_bank, sample_topic, synthetic_ideas

scratch = Path(tempfile.mkdtemp(prefix="svc-"))
bank = build_sample_bank(scratch / "bank")
topic = sample_topic()

store = RunStore(scratch / "run", create=True)
ideas = synthetic_ideas(topic, 4)
for idea in ideas:
    store.save_idea(idea)
store.save_pairs(
    [
        {"pair_id": "p1", "idea_a": ideas[0].id, "idea_b": ideas[1].id},
        {"pair_id": "p2", "idea_a": ideas[2].id, "idea_b": ideas[3].id},
    ]
)

client = TestClient(create_app(store, registry=bank, seed=0))

for annotator in ("ana", "ben"):
    # poll until this annotator has judged every open pair
    while True:
        got = client.get("/api/pairs/next", params={"annotator": annotator})
        if got.status_code == 404:
            break
        pair = got.json()
        # the payload never says which idea is which; the presentation order
        # is a private per-annotator shuffle, visible only through the text
        print(annotator, "sees", pair["pair_id"])
        print("  first:", pair["first"]["research_question"])
        print("  fields exposed:", sorted(pair["first"]))
        verdict = {c: "A" for c in ANNOTATION_CRITERIA}
        sent = client.post(
            "/api/judgments",
            json={"pair_id": pair["pair_id"], "annotator": annotator, "values": verdict},
        )
        print("  submitted:", sent.status_code)

# a repeat submission is refused, the judgment is already on disk
again = client.post(
    "/api/judgments",
    json={"pair_id": "p1", "annotator": "ana", "values": {c: "A" for c in ANNOTATION_CRITERIA}},
)
print("duplicate submission:", again.status_code)

stored = store.load_judgments()
print("stored judgments:", len(stored))
for j in stored:
    print(" ", j["annotator"], "order", j["order"], "canonical", j["values"]["Overall"])

stats = client.get("/api/stats").json()
print("alpha:", stats["alpha"]["per_criterion"]["Overall"])
print("win rate:", stats["win_rate"]["Overall"])
