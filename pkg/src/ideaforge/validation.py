"""Feasibility checking and preliminary hypothesis validation.

The validation loop drives a model through write-code/see-output turns inside
a sandbox. Every model turn is preserved verbatim in the trace: a turn is
split into text and fenced-code steps whose contents are contiguous slices of
the original, so concatenating step contents reproduces the turn byte for
byte. Fences are stripped only at execution time.
"""

from __future__ import annotations

import enum
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from .databank import DatasetEntry, Registry, metadata_block, resolve_indices
from .errors import SandboxError, StatsError, SummaryParseError, VerdictParseError
from .gateway import Message, Provider, Stage, make_request
from .ideas import (
    Idea,
    balanced_spans,
    parse_jsonish,
    render_for_judging,
    render_hypotheses,
)
from .sandbox import Limits, run_script
from .templates import render_template

DEFAULT_ROUND_CAP = 20
SUMMARY_TOKEN_BUDGET = 1000
BYTES_PER_TOKEN = 4  # coarse budget heuristic; enforcement is advisory
VERDICT_SCAN_LINES = 5

CONTINUE_NUDGE = (
    "Please continue the validation. When you are done, the last line of your "
    "output should be the final answer, in the JSON format like "
    "{'Hypothesis 1': 'Supported', ...}."
)


class StepKind(enum.Enum):
    TEXT = "text"
    CODE = "code"


@dataclass(frozen=True)
class TraceStep:
    type: StepKind
    content: str
    output: str | None = None
    error: str | None = None

    def __post_init__(self):
        if self.type is StepKind.CODE:
            if (self.output is None) == (self.error is None):
                raise ValueError("code step needs exactly one of output/error")
        elif self.output is not None or self.error is not None:
            raise ValueError("text step carries no output or error")

    def to_dict(self) -> dict:
        out: dict = {"type": self.type.value, "content": self.content}
        if self.output is not None:
            out["output"] = self.output
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "TraceStep":
        return cls(
            type=StepKind(raw["type"]),
            content=raw["content"],
            output=raw.get("output"),
            error=raw.get("error"),
        )


def split_turn(turn: str) -> list[tuple[StepKind, str]]:
    """Split a model turn into (kind, verbatim slice) segments.

    Code segments include their ``` fences; an unterminated fence swallows the
    rest of the turn. The slices concatenate back to the exact input.
    """
    lines = turn.splitlines(keepends=True)
    segments: list[tuple[StepKind, str]] = []
    buffer: list[str] = []
    in_code = False

    def flush(kind: StepKind):
        if buffer:
            segments.append((kind, "".join(buffer)))
            buffer.clear()

    for line in lines:
        stripped = line.strip()
        if not in_code and stripped.startswith("```"):
            flush(StepKind.TEXT)
            buffer.append(line)
            in_code = True
        elif in_code:
            buffer.append(line)
            if stripped == "```":
                flush(StepKind.CODE)
                in_code = False
        else:
            buffer.append(line)
    flush(StepKind.CODE if in_code else StepKind.TEXT)
    return segments


def code_body(content: str) -> str:
    """Executable source from a fenced code segment."""
    lines = content.splitlines(keepends=True)
    if lines and lines[0].strip().startswith("```"):
        lines = lines[1:]
    if lines and lines[-1].strip() == "```":
        lines = lines[:-1]
    return "".join(lines)


class HypothesisVerdict(enum.Enum):
    SUPPORTED = "Supported"
    NOT_SUPPORTED = "Not supported"


_HYPOTHESIS_KEY = "Hypothesis "


def parse_verdict(text: str, expected_count: int | None = None) -> dict[int, HypothesisVerdict]:
    """Final verdict map from the tail of a model turn.

    Only the last few non-empty lines are considered, per the prompt's
    last-line instruction; a verbose closing sentence after the object is
    tolerated. Values outside the exact two-string vocabulary are errors, so
    hedged answers keep the loop going.
    """
    non_empty = [line for line in text.splitlines() if line.strip()]
    tail_lines = non_empty[-VERDICT_SCAN_LINES:]
    candidates = list(tail_lines)
    if len(tail_lines) > 1:
        candidates.append("\n".join(tail_lines))  # pretty-printed objects span lines

    payload = None
    for candidate in reversed(candidates):
        for lo, hi in reversed(balanced_spans(candidate)):
            try:
                parsed = parse_jsonish(candidate[lo:hi])
            except ValueError:
                continue
            if isinstance(parsed, dict) and any(
                isinstance(k, str) and k.startswith(_HYPOTHESIS_KEY) for k in parsed
            ):
                payload = parsed
                break
        if payload is not None:
            break
    if payload is None:
        raise VerdictParseError("no verdict object in the last lines of the turn")

    verdicts: dict[int, HypothesisVerdict] = {}
    for key, value in payload.items():
        if not (isinstance(key, str) and key.startswith(_HYPOTHESIS_KEY)):
            raise VerdictParseError(f"unexpected key in verdict object: {key!r}")
        suffix = key[len(_HYPOTHESIS_KEY) :]
        if not suffix.isdigit():
            raise VerdictParseError(f"malformed hypothesis key: {key!r}")
        index = int(suffix)
        try:
            verdicts[index] = HypothesisVerdict(value)
        except ValueError:
            raise VerdictParseError(
                f"verdict for {key!r} outside the closed vocabulary: {value!r}"
            )
    if expected_count is not None and set(verdicts) != set(range(1, expected_count + 1)):
        raise VerdictParseError(
            f"verdict covers hypotheses {sorted(verdicts)}, expected 1..{expected_count}"
        )
    return verdicts


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    plan: str | None = None
    data_used: tuple[int, ...] | None = None
    reason: str | None = None

    def __post_init__(self):
        if self.feasible:
            if not self.plan or not self.data_used:
                raise ValueError("feasible verdict needs a plan and data indices")
        elif self.plan is not None or self.data_used is not None:
            raise ValueError("infeasible verdict must not carry plan or data")

    def to_dict(self) -> dict:
        out: dict = {"feasible": self.feasible}
        if self.plan is not None:
            out["plan"] = self.plan
        if self.data_used is not None:
            out["data_used"] = list(self.data_used)
        if self.reason is not None:
            out["reason"] = self.reason
        return out

    @classmethod
    def from_dict(cls, raw: dict) -> "FeasibilityVerdict":
        data = raw.get("data_used")
        return cls(
            feasible=bool(raw["feasible"]),
            plan=raw.get("plan"),
            data_used=tuple(data) if data is not None else None,
            reason=raw.get("reason"),
        )


def _parse_feasibility_payload(text: str) -> dict:
    for lo, hi in balanced_spans(text):
        try:
            payload = parse_jsonish(text[lo:hi])
        except ValueError:
            continue
        if isinstance(payload, dict) and "Feasibility" in payload:
            return payload
    raise VerdictParseError("no feasibility object in model response")


def check_feasibility(idea: Idea, registry: Registry, provider: Provider) -> FeasibilityVerdict:
    """Ask the model whether the hypotheses are testable with catalogued data.

    A response that breaks the dataset limits (or is malformed) gets one
    follow-up explaining the problem; a second violation settles the verdict
    as infeasible rather than looping.
    """
    prompt = render_template(
        "feasibility",
        {
            "content of the idea": render_for_judging(idea),
            "content of the metadata": metadata_block(registry),
        },
    )
    messages = [Message("user", prompt)]
    last_problem = ""
    for attempt in range(2):
        request = make_request(messages, stage=Stage.FEASIBILITY, idea=idea.id)
        response = provider.complete(request)
        try:
            payload = _parse_feasibility_payload(response)
            return _verdict_from_payload(payload, registry)
        except VerdictParseError as exc:
            last_problem = str(exc)
            if attempt == 0:
                messages.append(Message("assistant", response))
                messages.append(
                    Message(
                        "user",
                        f"Your response was invalid: {exc}. Please answer again "
                        "following the output requirements exactly.",
                    )
                )
    return FeasibilityVerdict(feasible=False, reason=f"constraint: {last_problem}")


def _verdict_from_payload(payload: dict, registry: Registry) -> FeasibilityVerdict:
    flag = payload.get("Feasibility")
    if flag not in ("Yes", "No"):
        raise VerdictParseError(f"'Feasibility' must be 'Yes' or 'No', got {flag!r}")
    if flag == "No":
        return FeasibilityVerdict(feasible=False, reason="model")
    plan = payload.get("Validation Plan")
    data = payload.get("Data Used")
    if not isinstance(plan, str) or not plan.strip():
        raise VerdictParseError("'Validation Plan' missing or empty")
    if not isinstance(data, list) or not data:
        raise VerdictParseError("'Data Used' missing or empty")
    indices = []
    for item in data:
        if isinstance(item, str) and item.isdigit():
            item = int(item)
        if not isinstance(item, int) or isinstance(item, bool):
            raise VerdictParseError(f"'Data Used' entry is not an index: {item!r}")
        indices.append(item)
    try:
        resolve_indices(registry, indices)
    except Exception as exc:
        raise VerdictParseError(f"'Data Used' violates dataset limits: {exc}")
    return FeasibilityVerdict(feasible=True, plan=plan, data_used=tuple(indices))


@dataclass(frozen=True)
class SummaryStep:
    type: StepKind
    summarization: str

    def to_dict(self) -> dict:
        return {"type": self.type.value, "summarization": self.summarization}

    @classmethod
    def from_dict(cls, raw: dict) -> "SummaryStep":
        return cls(type=StepKind(raw["type"]), summarization=raw["summarization"])


@dataclass
class ValidationRecord:
    idea_id: str
    verdict: FeasibilityVerdict | None
    trace: list[TraceStep]
    hypothesis_verdicts: dict[int, HypothesisVerdict]
    rounds_used: int
    complete: bool
    summary: list[SummaryStep] | None = None

    def to_dict(self) -> dict:
        return {
            "idea_id": self.idea_id,
            "verdict": self.verdict.to_dict() if self.verdict else None,
            "trace": [step.to_dict() for step in self.trace],
            "hypothesis_verdicts": {
                str(k): v.value for k, v in sorted(self.hypothesis_verdicts.items())
            },
            "rounds_used": self.rounds_used,
            "complete": self.complete,
            "summary": [s.to_dict() for s in self.summary] if self.summary else None,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ValidationRecord":
        return cls(
            idea_id=raw["idea_id"],
            verdict=FeasibilityVerdict.from_dict(raw["verdict"]) if raw.get("verdict") else None,
            trace=[TraceStep.from_dict(s) for s in raw["trace"]],
            hypothesis_verdicts={
                int(k): HypothesisVerdict(v)
                for k, v in raw.get("hypothesis_verdicts", {}).items()
            },
            rounds_used=raw["rounds_used"],
            complete=raw["complete"],
            summary=[SummaryStep.from_dict(s) for s in raw["summary"]]
            if raw.get("summary")
            else None,
        )


def stage_datasets(entries: Sequence[DatasetEntry], root, workdir) -> list[str]:
    """Copy dataset payloads into the sandbox workdir; returns staged basenames."""
    workdir = Path(workdir)
    names = []
    for entry in entries:
        src = entry.resolve_path(Path(root))
        if not src.is_file():
            raise SandboxError(f"dataset payload missing: {src}")
        name = os.path.basename(entry.path)
        shutil.copy(src, workdir / name)
        names.append(name)
    return names


def staged_data_block(entries: Sequence[DatasetEntry]) -> str:
    return "\n".join(
        f"{e.index}. {e.name}: {e.description} (file: {os.path.basename(e.path)})"
        for e in entries
    )


def validate_hypotheses(
    idea: Idea,
    datasets: Sequence[DatasetEntry],
    registry_root,
    provider: Provider,
    verdict: FeasibilityVerdict | None = None,
    round_cap: int = DEFAULT_ROUND_CAP,
    limits: Limits = Limits(),
    interpreter: str | None = None,
    workdir=None,
) -> ValidationRecord:
    """Multi-turn validation session; returns the full trace and any verdicts.

    Each model turn's code blocks run in the sandbox and their outputs (or
    errors) come back as the next user turn. The loop ends when a turn's tail
    parses into a verdict covering every hypothesis, or at round_cap.
    """
    owns_workdir = workdir is None
    if owns_workdir:
        workdir = tempfile.mkdtemp(prefix="validate-")
    try:
        stage_datasets(datasets, registry_root, workdir)
        prompt = render_template(
            "hypothesis_validation",
            {
                "hypotheses within the idea": render_hypotheses(idea.hypotheses),
                "metadata of datasets selected": staged_data_block(datasets),
            },
        )
        messages = [Message("user", prompt)]
        trace: list[TraceStep] = []
        n = len(idea.hypotheses)

        for turn in range(1, round_cap + 1):
            request = make_request(
                messages, stage=Stage.VALIDATION, idea=idea.id, turn=str(turn)
            )
            response = provider.complete(request)
            messages.append(Message("assistant", response))

            feedback_parts: list[str] = []
            code_no = 0
            for kind, content in split_turn(response):
                if kind is StepKind.TEXT:
                    trace.append(TraceStep(StepKind.TEXT, content))
                    continue
                code_no += 1
                result = run_script(
                    code_body(content), workdir, limits=limits, interpreter=interpreter
                )
                if result.status == "ok":
                    trace.append(TraceStep(StepKind.CODE, content, output=result.stdout))
                    feedback_parts.append(f"Output of code block {code_no}:\n{result.stdout}")
                else:
                    detail = result.stderr
                    if result.status == "timeout":
                        detail = (
                            f"execution timed out after {limits.wall_seconds:g} seconds\n"
                            + detail
                        )
                    elif not detail.strip():
                        detail = f"exit status {result.exit_code}"
                    trace.append(TraceStep(StepKind.CODE, content, error=detail))
                    feedback_parts.append(f"Error of code block {code_no}:\n{detail}")

            try:
                verdicts = parse_verdict(response, expected_count=n)
            except VerdictParseError:
                verdicts = None
            if verdicts is not None:
                return ValidationRecord(
                    idea_id=idea.id,
                    verdict=verdict,
                    trace=trace,
                    hypothesis_verdicts=verdicts,
                    rounds_used=turn,
                    complete=True,
                )
            feedback = "\n\n".join(feedback_parts) if feedback_parts else CONTINUE_NUDGE
            messages.append(Message("user", feedback))

        return ValidationRecord(
            idea_id=idea.id,
            verdict=verdict,
            trace=trace,
            hypothesis_verdicts={},
            rounds_used=round_cap,
            complete=False,
        )
    finally:
        if owns_workdir:
            shutil.rmtree(workdir, ignore_errors=True)


def summary_tokens(steps: Sequence[SummaryStep]) -> int:
    text = "".join(step.summarization for step in steps)
    return (len(text.encode("utf-8")) + BYTES_PER_TOKEN - 1) // BYTES_PER_TOKEN


def render_raw_trace(trace: Sequence[TraceStep]) -> str:
    return json.dumps([step.to_dict() for step in trace], ensure_ascii=False, indent=2)


def _parse_summary(text: str) -> list[SummaryStep]:
    for lo, hi in balanced_spans(text, "[", "]"):
        try:
            payload = parse_jsonish(text[lo:hi])
        except ValueError:
            continue
        if not isinstance(payload, list) or not payload:
            continue
        steps = []
        for item in payload:
            if (
                not isinstance(item, dict)
                or item.get("type") not in ("text", "code")
                or not isinstance(item.get("summarization"), str)
            ):
                steps = None
                break
            steps.append(SummaryStep(StepKind(item["type"]), item["summarization"]))
        if steps:
            return steps
    raise SummaryParseError("no summary step list in model response")


def summarize_trace(
    record: ValidationRecord,
    provider: Provider,
    budget_tokens: int = SUMMARY_TOKEN_BUDGET,
) -> list[SummaryStep]:
    """Condense a raw trace into natural-language steps and attach it.

    The token budget is advisory: one over-budget result triggers a single
    tightened re-request, whose answer is accepted either way.
    """
    if not record.trace:
        raise ValueError("cannot summarize an empty trace")
    prompt = render_template(
        "summarization", {"raw validation traces": render_raw_trace(record.trace)}
    )
    messages = [Message("user", prompt)]

    steps: list[SummaryStep] | None = None
    parse_failures = 0
    while True:
        request = make_request(messages, stage=Stage.SUMMARIZATION, idea=record.idea_id)
        response = provider.complete(request)
        try:
            steps = _parse_summary(response)
        except SummaryParseError:
            parse_failures += 1
            if parse_failures > 1:
                raise
            continue
        if summary_tokens(steps) > budget_tokens and len(messages) == 1:
            messages.append(Message("assistant", response))
            messages.append(
                Message(
                    "user",
                    f"The summary exceeds {budget_tokens} tokens. Please produce a "
                    "shorter version in the same json structure, keeping only the "
                    "most crucial steps.",
                )
            )
            continue
        break
    record.summary = steps
    return steps


class PilotLabel(enum.Enum):
    SUPPORTED = "Supported"
    REFUTED = "Refuted"


@dataclass(frozen=True)
class LabeledHypothesis:
    hypothesis: str
    label: PilotLabel
    idea_id: str
    index: int  # 1-based position within the idea
    dataset_refs: tuple[int, ...] = ()


@dataclass(frozen=True)
class PilotScore:
    accuracy: float
    scored: int
    correct: int
    excluded: int
    per_label: dict

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "scored": self.scored,
            "correct": self.correct,
            "excluded": self.excluded,
            "per_label": self.per_label,
        }


_MATCHING = {
    PilotLabel.SUPPORTED: HypothesisVerdict.SUPPORTED,
    PilotLabel.REFUTED: HypothesisVerdict.NOT_SUPPORTED,
}


def score_pilot(
    records: Sequence[ValidationRecord], labels: Sequence[LabeledHypothesis]
) -> PilotScore:
    """Accuracy of model verdicts against ground-truth labels.

    Hypotheses whose record never completed are excluded from the denominator
    and counted separately.
    """
    by_idea: dict[str, ValidationRecord] = {}
    for record in records:
        if record.idea_id in by_idea:
            raise StatsError(f"duplicate record for idea {record.idea_id!r}")
        by_idea[record.idea_id] = record

    scored = correct = excluded = 0
    per_label = {
        label.value: {"total": 0, "correct": 0} for label in PilotLabel
    }
    for label in labels:
        record = by_idea.get(label.idea_id)
        if record is None:
            raise StatsError(f"no validation record for idea {label.idea_id!r}")
        if not record.complete:
            excluded += 1
            continue
        verdict = record.hypothesis_verdicts.get(label.index)
        if verdict is None:
            raise StatsError(
                f"record for {label.idea_id!r} has no verdict for hypothesis {label.index}"
            )
        scored += 1
        per_label[label.label.value]["total"] += 1
        if verdict is _MATCHING[label.label]:
            correct += 1
            per_label[label.label.value]["correct"] += 1
    if scored == 0:
        raise StatsError("no scorable hypotheses (all records incomplete?)")
    return PilotScore(
        accuracy=correct / scored,
        scored=scored,
        correct=correct,
        excluded=excluded,
        per_label=per_label,
    )
