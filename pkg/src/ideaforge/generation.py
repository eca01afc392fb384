"""Literature-grounded batched idea generation.

One loop serves both experimental arms: with_metadata controls whether the
dataset listing is injected into the prompt. Research-question fingerprints
deduplicate across batches, and a campaign that stops producing new questions
stalls out instead of spinning forever.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import Callable, Protocol, Sequence

from .databank import Registry, metadata_block
from .errors import IdeaParseError, StallError
from .gateway import Provider, Stage, make_request
from .ideas import (
    Idea,
    LiteratureItem,
    Provenance,
    Topic,
    fingerprint,
    make_idea,
    parse_idea_batch,
    render_for_generation_example,
)
from .templates import metadata_section, render_template

log = logging.getLogger(__name__)

DEFAULT_TOTAL = 50
DEFAULT_BATCH_SIZE = 5
DEFAULT_LITERATURE_K = 10
STALL_CAP = 5
PARSE_ATTEMPTS = 3


@dataclass
class GenerationJob:
    topic: Topic
    total: int = DEFAULT_TOTAL
    batch_size: int = DEFAULT_BATCH_SIZE
    with_metadata: bool = False
    example_ideas: Sequence[Idea] = field(default_factory=tuple)
    literature_k: int = DEFAULT_LITERATURE_K
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.batch_size <= self.total:
            raise ValueError("need total >= batch_size >= 1")
        if not self.example_ideas:
            self.example_ideas = load_example_ideas()


class LiteratureProvider(Protocol):
    def search(self, topic: Topic, k: int) -> list[LiteratureItem]: ...


_WORD_RE = re.compile(r"[a-z0-9]+")


def _tokens(text: str) -> set[str]:
    return set(_WORD_RE.findall(text.lower()))


class FileLiteratureProvider:
    """Corpus-backed retrieval: rank records by token overlap with the topic.

    The corpus is a JSON array of {title, abstract, source_id} objects.
    """

    def __init__(self, records: Sequence[dict]):
        self.items = [
            LiteratureItem(
                title=r["title"], abstract=r.get("abstract", ""), source_id=r.get("source_id")
            )
            for r in records
        ]

    @classmethod
    def from_file(cls, path) -> "FileLiteratureProvider":
        with open(path, encoding="utf-8") as fh:
            records = json.load(fh)
        if not isinstance(records, list):
            raise ValueError(f"literature corpus {path} must be a JSON array")
        return cls(records)

    def search(self, topic: Topic, k: int) -> list[LiteratureItem]:
        if k <= 0:
            return []
        query = _tokens(topic.name) | _tokens(topic.description)
        scored = []
        for pos, item in enumerate(self.items):
            score = len(query & (_tokens(item.title) | _tokens(item.abstract)))
            if score > 0:
                scored.append((-score, pos, item))
        scored.sort(key=lambda t: t[:2])
        return [item for _, _, item in scored[:k]]


def fetch_literature(topic: Topic, k: int, provider: LiteratureProvider) -> list[LiteratureItem]:
    items = provider.search(topic, k)
    if not items:
        log.warning("no literature found for topic %r; generating without background", topic.id)
    return items


def literature_lines(items: Sequence[LiteratureItem]) -> str:
    return "\n".join(f"Title: {item.title}\nAbstract: {item.abstract}" for item in items)


def example_ideas_block(examples: Sequence[Idea]) -> str:
    parts = []
    for pos, idea in enumerate(examples, start=1):
        parts.append(f"Example idea {pos}:\n{render_for_generation_example(idea)}")
    return "\n\n".join(parts)


def avoid_list(questions: Sequence[str]) -> str:
    return "\n".join(f"- {q}" for q in questions)


def load_example_ideas() -> list[Idea]:
    raw = json.loads(
        resources.files("ideaforge")
        .joinpath("data", "example_ideas.json")
        .read_text(encoding="utf-8")
    )
    return [
        make_idea(
            r["topic_id"],
            r["research_question"],
            r["theory"],
            r["hypotheses"],
            policy_implication=r.get("policy_implication"),
            provenance=Provenance.HUMAN_AUTHORED,
        )
        for r in raw
    ]


def generation_prompt(
    job: GenerationJob,
    literature: Sequence[LiteratureItem],
    existing_questions: Sequence[str],
    count: int,
    registry: Registry | None = None,
) -> str:
    if job.with_metadata:
        if registry is None:
            raise ValueError("with_metadata generation needs a dataset registry")
        section = metadata_section(metadata_block(registry))
    else:
        section = metadata_section(None)
    return render_template(
        "idea_generation",
        {
            "research topic": job.topic.name,
            "titles and abstracts of related literature": literature_lines(literature),
            "metadata section": section,
            "number of ideas to generate": str(count),
            "content of two example ideas": example_ideas_block(job.example_ideas),
            "existing ideas generated": avoid_list(existing_questions),
        },
    )


def generate_batch(
    job: GenerationJob,
    provider: Provider,
    literature: Sequence[LiteratureItem],
    existing_questions: Sequence[str],
    count: int | None = None,
    registry: Registry | None = None,
) -> list[Idea]:
    """One prompted batch, parsed whole-or-nothing with a bounded retry."""
    count = count or job.batch_size
    prompt = generation_prompt(job, literature, existing_questions, count, registry)
    request = make_request(
        prompt,
        stage=Stage.GENERATION,
        topic=job.topic.id,
        with_metadata=str(job.with_metadata).lower(),
    )
    last_error: IdeaParseError | None = None
    for _ in range(PARSE_ATTEMPTS):
        response = provider.complete(request)
        try:
            return parse_idea_batch(response, job.topic, with_metadata=job.with_metadata)
        except IdeaParseError as exc:
            last_error = exc
    raise IdeaParseError(
        f"batch unparseable after {PARSE_ATTEMPTS} attempts (topic {job.topic.id}): {last_error}"
    )


def run_campaign(
    job: GenerationJob,
    provider: Provider,
    literature_provider: LiteratureProvider | None = None,
    registry: Registry | None = None,
    on_idea: Callable[[Idea], None] | None = None,
) -> list[Idea]:
    """Generate until `total` unique ideas are collected or the well runs dry.

    A batch contributing zero new fingerprints is barren; STALL_CAP barren
    batches in a row abort the campaign.
    """
    literature = (
        fetch_literature(job.topic, job.literature_k, literature_provider)
        if literature_provider is not None
        else []
    )
    accepted: list[Idea] = []
    questions: list[str] = []
    seen: set[str] = set()
    barren = 0

    while len(accepted) < job.total:
        count = min(job.batch_size, job.total - len(accepted))
        batch = generate_batch(job, provider, literature, questions, count, registry)
        fresh = 0
        for idea in batch:
            if len(accepted) >= job.total:
                break
            fp = fingerprint(idea)
            if fp in seen:
                continue
            seen.add(fp)
            accepted.append(idea)
            questions.append(idea.research_question)
            fresh += 1
            if on_idea is not None:
                on_idea(idea)
        if fresh == 0:
            barren += 1
            if barren >= STALL_CAP:
                raise StallError(
                    f"campaign for topic {job.topic.id!r} stalled: "
                    f"{STALL_CAP} consecutive batches produced no new ideas "
                    f"({len(accepted)}/{job.total} collected)"
                )
        else:
            barren = 0
    return accepted
