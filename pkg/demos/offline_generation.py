"""
Idea generation without a model
===============================

Drives a generation campaign from scripted completions. The campaign asks
for ideas in batches, keeps a growing avoid list of research questions it
has already accepted, and drops near-duplicates by fingerprint.
"""

from ideaforge.gateway import QueueProvider
from ideaforge.generation import GenerationJob, run_campaign
from ideaforge.testing import sample_topic


def batch(questions):
    ideas = ", ".join(
        "{'Research Question': '%s', 'Theory': 'Costs shape who travels.', "
        "'Hypotheses': ['Richer states send more people.']}" % q
        for q in questions
    )
    return "Sure, here you go.\n{'ideas': [%s]}" % ideas


topic = sample_topic()

# the second batch repeats a question on purpose; only one copy survives
provider = QueueProvider(
    [
        batch(["Does wealth raise attendance?", "Does distance lower attendance?"]),
        batch(["Does wealth raise attendance?", "Do hosts send bigger delegations?"]),
        batch(["Does aid dependence raise attendance?"]),
    ]
)

job = GenerationJob(topic=topic, total=4, batch_size=2, seed=0)
ideas = run_campaign(job, provider)

for idea in ideas:
    print(idea.id, "->", idea.research_question)
print("kept", len(ideas), "ideas from", len(provider.requests), "requests")

# the avoid list in the last prompt shows everything accepted so far
final_prompt = provider.requests[-1].messages[0].content
avoid = [line for line in final_prompt.splitlines() if line.startswith("- ")]
print("avoid list at the end:")
for line in avoid:
    print(" ", line)
