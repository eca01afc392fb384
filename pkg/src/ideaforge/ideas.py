"""Domain types for topics and research ideas, plus parsing of model-emitted batches.

An idea is a research question, a theory, and 1-5 hypotheses; a policy
implication may be attached during generation but is stripped whenever ideas
are rendered for judging.
"""

from __future__ import annotations

import enum
import hashlib
import json
import re
import string
from dataclasses import dataclass, field

from .errors import IdeaParseError

MIN_HYPOTHESES = 1
MAX_HYPOTHESES = 5

_IDEA_KEYS = ("Research Question", "Theory", "Hypotheses")


class Provenance(enum.Enum):
    GENERATED = "generated"
    GROUND_TRUTH = "ground_truth"
    HUMAN_AUTHORED = "human_authored"


@dataclass(frozen=True)
class Topic:
    id: str
    name: str  # at most five words
    description: str = ""

    def __post_init__(self):
        if not self.name.strip():
            raise ValueError("topic name must be non-empty")


@dataclass(frozen=True)
class LiteratureItem:
    title: str
    abstract: str
    source_id: str | None = None

    def __post_init__(self):
        if not self.title.strip():
            raise ValueError("literature item title must be non-empty")


@dataclass(frozen=True)
class Idea:
    id: str
    topic_id: str
    research_question: str
    theory: str
    hypotheses: tuple[str, ...]
    policy_implication: str | None = None
    provenance: Provenance = Provenance.GENERATED
    with_metadata: bool = False
    extensions: tuple[tuple[str, object], ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not self.research_question.strip():
            raise ValueError("research question must be non-empty")
        if not MIN_HYPOTHESES <= len(self.hypotheses) <= MAX_HYPOTHESES:
            raise ValueError(
                f"idea must have {MIN_HYPOTHESES}-{MAX_HYPOTHESES} hypotheses, "
                f"got {len(self.hypotheses)}"
            )


def content_id(topic_id: str, research_question: str, theory: str, hypotheses) -> str:
    """Deterministic idea id from topic and content, stable across reruns."""
    blob = json.dumps(
        [topic_id, research_question, theory, list(hypotheses)],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return f"{topic_id}-{hashlib.sha256(blob.encode('utf-8')).hexdigest()[:12]}"


def make_idea(
    topic_id: str,
    research_question: str,
    theory: str,
    hypotheses,
    policy_implication: str | None = None,
    provenance: Provenance = Provenance.GENERATED,
    with_metadata: bool = False,
) -> Idea:
    hypotheses = tuple(hypotheses)
    return Idea(
        id=content_id(topic_id, research_question, theory, hypotheses),
        topic_id=topic_id,
        research_question=research_question,
        theory=theory,
        hypotheses=hypotheses,
        policy_implication=policy_implication,
        provenance=provenance,
        with_metadata=with_metadata,
    )


def balanced_spans(text: str, open_ch: str = "{", close_ch: str = "}") -> list[tuple[int, int]]:
    """(start, end) spans of top-level balanced bracket groups, string-aware.

    Understands both quote styles so Python-style dicts with single quotes
    survive the scan intact.
    """
    spans = []
    depth = 0
    start = None
    in_string: str | None = None
    escaped = False
    for pos, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == in_string:
                in_string = None
            continue
        if ch in "\"'":
            in_string = ch
        elif ch == open_ch:
            if depth == 0:
                start = pos
            depth += 1
        elif ch == close_ch:
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    spans.append((start, pos + 1))
                    start = None
    return spans


def parse_jsonish(text: str):
    """json.loads with a Python-literal fallback for single-quoted output."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        pass
    try:
        import ast

        return ast.literal_eval(text)
    except (ValueError, SyntaxError):
        raise ValueError("not a JSON or Python literal")


def extract_json_object(text: str):
    """First balanced object in ``text``, tolerating code fences, prose, and repr quoting."""
    for lo, hi in balanced_spans(text):
        try:
            payload = parse_jsonish(text[lo:hi])
        except ValueError:
            continue
        if isinstance(payload, dict):
            return payload
    raise IdeaParseError("no JSON object found in model output")


def parse_idea_batch(text: str, topic: Topic, with_metadata: bool = False) -> list[Idea]:
    """Parse one generation completion into ideas; any malformed item rejects the batch."""
    payload = extract_json_object(text)
    if "ideas" not in payload:
        raise IdeaParseError("model output JSON has no 'ideas' key")
    items = payload["ideas"]
    if not isinstance(items, list):
        raise IdeaParseError("'ideas' must be a list")

    ideas = []
    for pos, item in enumerate(items):
        if not isinstance(item, dict):
            raise IdeaParseError(f"idea {pos}: not an object")
        for key in _IDEA_KEYS:
            if key not in item:
                raise IdeaParseError(f"idea {pos}: missing required field {key!r}")
        hypotheses = item["Hypotheses"]
        if not isinstance(hypotheses, list) or not all(isinstance(h, str) for h in hypotheses):
            raise IdeaParseError(f"idea {pos}: 'Hypotheses' must be a list of strings")
        if not MIN_HYPOTHESES <= len(hypotheses) <= MAX_HYPOTHESES:
            raise IdeaParseError(
                f"idea {pos}: {len(hypotheses)} hypotheses, "
                f"allowed range is {MIN_HYPOTHESES}-{MAX_HYPOTHESES}"
            )
        question = item["Research Question"]
        theory = item["Theory"]
        if not isinstance(question, str) or not question.strip():
            raise IdeaParseError(f"idea {pos}: empty research question")
        if not isinstance(theory, str):
            raise IdeaParseError(f"idea {pos}: 'Theory' must be a string")
        policy = item.get("Policy Implication")
        if policy is not None and not isinstance(policy, str):
            raise IdeaParseError(f"idea {pos}: 'Policy Implication' must be a string")
        ideas.append(
            make_idea(
                topic.id,
                question,
                theory,
                hypotheses,
                policy_implication=policy,
                with_metadata=with_metadata,
            )
        )
    return ideas


def render_hypotheses(hypotheses) -> str:
    return "\n".join(f"{i}. {h}" for i, h in enumerate(hypotheses, start=1))


def render_for_judging(idea: Idea, summary=None) -> str:
    """Idea text as shown to judges: three labeled sections, never the policy implication.

    A "Preliminary Validation" section is appended iff a summary is provided.
    """
    parts = [
        f"Research Question: {idea.research_question}",
        f"Theory: {idea.theory}",
        "Hypotheses:",
        render_hypotheses(idea.hypotheses),
    ]
    if summary:
        parts.append("Preliminary Validation:")
        parts.append(
            "\n".join(
                f"{i}. [{step.type.value}] {step.summarization}"
                for i, step in enumerate(summary, start=1)
            )
        )
    return "\n".join(parts)


def render_for_generation_example(idea: Idea) -> str:
    """Idea text in the few-shot slot of the generation prompt (policy kept)."""
    parts = [
        f"Research Question: {idea.research_question}",
        f"Theory: {idea.theory}",
        "Hypotheses:",
        render_hypotheses(idea.hypotheses),
    ]
    if idea.policy_implication:
        parts.append(f"Policy Implication: {idea.policy_implication}")
    return "\n".join(parts)


_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def fingerprint(idea_or_question: Idea | str) -> str:
    """Dedup key over the research question: case-, punctuation-, and space-insensitive."""
    question = (
        idea_or_question.research_question
        if isinstance(idea_or_question, Idea)
        else idea_or_question
    )
    normal = re.sub(r"\s+", " ", question.lower().translate(_PUNCT_TABLE)).strip()
    return hashlib.sha256(normal.encode("utf-8")).hexdigest()


_KNOWN_FIELDS = (
    "id",
    "topic_id",
    "research_question",
    "theory",
    "hypotheses",
    "policy_implication",
    "provenance",
    "with_metadata",
)


def idea_to_dict(idea: Idea) -> dict:
    out: dict = {
        "id": idea.id,
        "topic_id": idea.topic_id,
        "research_question": idea.research_question,
        "theory": idea.theory,
        "hypotheses": list(idea.hypotheses),
        "provenance": idea.provenance.value,
        "with_metadata": idea.with_metadata,
    }
    if idea.policy_implication is not None:
        out["policy_implication"] = idea.policy_implication
    for key, value in idea.extensions:
        out[key] = value
    return out


def serialize_idea(idea: Idea) -> str:
    """Canonical JSON text: fixed key order, unknown keys re-emitted after known ones."""
    out = idea_to_dict(idea)
    ordered = {k: out[k] for k in _KNOWN_FIELDS if k in out}
    for key in sorted(k for k in out if k not in _KNOWN_FIELDS):
        ordered[key] = out[key]
    return json.dumps(ordered, indent=2, ensure_ascii=False) + "\n"


def idea_from_dict(raw: dict) -> Idea:
    try:
        hypotheses = tuple(raw["hypotheses"])
        idea = Idea(
            id=raw["id"],
            topic_id=raw["topic_id"],
            research_question=raw["research_question"],
            theory=raw["theory"],
            hypotheses=hypotheses,
            policy_implication=raw.get("policy_implication"),
            provenance=Provenance(raw.get("provenance", "generated")),
            with_metadata=bool(raw.get("with_metadata", False)),
            extensions=tuple(
                sorted((k, v) for k, v in raw.items() if k not in _KNOWN_FIELDS)
            ),
        )
    except (KeyError, ValueError, TypeError) as exc:
        raise IdeaParseError(f"malformed idea record: {exc}") from exc
    return idea


def deserialize_idea(text: str) -> Idea:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IdeaParseError(f"malformed idea JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise IdeaParseError("idea record must be a JSON object")
    return idea_from_dict(raw)
