"""
Record once, replay everywhere
==============================

Every model exchange carries a digest of its request. A recording provider
appends request/response pairs to a transcript; a replay provider serves
them back by digest, so the same transcript drives library calls and the
command line alike, with byte-identical results.
"""

import json
import tempfile
from pathlib import Path

from ideaforge.cli import main
from ideaforge.gateway import (
    QueueProvider,
    RecordingProvider,
    ReplayProvider,
    load_transcript,
)
from ideaforge.generation import GenerationJob, run_campaign
from ideaforge.store import RunStore, export_run
from ideaforge.testing import sample_topic


def batch(questions):
    ideas = ", ".join(
        "{'Research Question': '%s', 'Theory': 'Travel budgets bind.', "
        "'Hypotheses': ['Attendance tracks the budget.']}" % q
        for q in questions
    )
    return "{'ideas': [%s]}" % ideas


scratch = Path(tempfile.mkdtemp(prefix="replay-"))
topic = sample_topic()
transcript = scratch / "transcript.jsonl"

# record a two-batch campaign
scripted = QueueProvider(
    [
        batch(["Does wealth raise attendance?", "Does distance lower attendance?"]),
        batch(["Do hosts send bigger delegations?", "Does aid raise attendance?"]),
    ]
)
job = GenerationJob(topic=topic, total=4, batch_size=2, seed=0)
recorded = run_campaign(job, RecordingProvider(scripted, transcript))
print("recorded", len(recorded), "ideas;", len(transcript.read_text().splitlines()), "transcript lines")

# replaying the transcript reproduces the identical ideas
replayed = run_campaign(job, ReplayProvider(load_transcript(transcript)))
print("replay matches:", [i.id for i in replayed] == [i.id for i in recorded])

# the command line consumes the same transcript
topics_file = scratch / "topics.json"
topics_file.write_text(
    json.dumps([{"id": topic.id, "name": topic.name, "description": topic.description}])
)
for run in ("runA", "runB"):
    code = main(
        [
            "generate", "--run", str(scratch / run), "--topics", str(topics_file),
            "--n", "4", "--batch", "2", "--seed", "0", "--replay", str(transcript),
        ]
    )
    assert code == 0

# deterministic export: both runs zip to the same bytes
a = export_run(RunStore(scratch / "runA"), scratch / "a.zip").read_bytes()
b = export_run(RunStore(scratch / "runB"), scratch / "b.zip").read_bytes()
print("exports byte-identical:", a == b, f"({len(a)} bytes)")
