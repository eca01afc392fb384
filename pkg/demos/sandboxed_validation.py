"""
Multi-turn validation in the sandbox
====================================

Replays a short validation session: the scripted analyst writes code, the
sandbox runs it against staged CSV files, and the loop feeds outputs back
until a final verdict line appears. The trace keeps the raw turns intact.
"""

import tempfile
from pathlib import Path

from ideaforge.gateway import QueueProvider
from ideaforge.ideas import make_idea
from ideaforge.testing import build_sample_bank, sample_topic
from ideaforge.validation import validate_hypotheses

bank = build_sample_bank(Path(tempfile.mkdtemp(prefix="bank-")) / "bank")
topic = sample_topic()

idea = make_idea(
    topic.id,
    "Does national income predict delegation size?",
    "Sending people to two-week meetings is expensive.",
    ["Delegation size rises with GDP.", "The gradient is steeper for small states."],
)

turns = [
    # turn 1: look at the staged data
    "Start by checking what the GDP panel contains.\n"
    "```python\n"
    "import csv\n"
    "rows = list(csv.DictReader(open('gdp.csv')))\n"
    "print(len(rows), 'rows')\n"
    "print(sorted({r['country'] for r in rows}))\n"
    "```\n",
    # turn 2: a deliberately broken step; the error comes back as feedback
    "Now load the attendance file.\n"
    "```python\n"
    "rows = list(open('attendance.csv'))\n"
    "```\n",
    # turn 3: recover and close with a verdict the parser accepts
    "That file is not staged here, so I will reason from the panel alone.\n"
    "{'Hypothesis 1': 'Supported', 'Hypothesis 2': 'Not supported'}",
]

record = validate_hypotheses(
    idea, [bank.entry(6)], bank.root, QueueProvider(turns)
)

print("complete:", record.complete, "after", record.rounds_used, "rounds")
for n, verdict in sorted(record.hypothesis_verdicts.items()):
    print(f"hypothesis {n}: {verdict.value}")

print("\ntrace:")
for step in record.trace:
    kind = step.type.value
    head = step.content.splitlines()[0]
    print(f"  [{kind}] {head}")
    if step.output is not None:
        print("     output:", step.output.splitlines()[0])
    if step.error is not None:
        print("     error:", step.error.splitlines()[-1])
