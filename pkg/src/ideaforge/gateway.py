"""Chat-completion plumbing: stage parameter defaults, a live HTTP provider,
and a record/replay pair that makes every pipeline run repeatable offline.

A request's identity is the digest of its rendered messages plus sampling
parameters.  Editing a template therefore changes digests and makes stale
transcripts fail loudly instead of replaying the wrong answer.
"""

from __future__ import annotations

import enum
import hashlib
import json
import logging
import os
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Protocol

import httpx

from .errors import ProviderError, ReplayMissError

log = logging.getLogger(__name__)

DEFAULT_MODEL = "gpt-4o"
GENERATION_TEMPERATURE = 1.0  # default only; post-generation stages are pinned to 0
POST_GENERATION_TEMPERATURE = 0.0
JUDGE_MAX_TOKENS = 1024
WORKER_MAX_TOKENS = 4096


class Stage(enum.Enum):
    GENERATION = "generation"
    FEASIBILITY = "feasibility"
    VALIDATION = "validation"
    SUMMARIZATION = "summarization"
    SELECTION = "selection"
    EVALUATION = "evaluation"


def stage_defaults(stage: Stage) -> dict:
    """Sampling parameters per stage; only generation samples above temperature 0."""
    if stage is Stage.GENERATION:
        return {"temperature": GENERATION_TEMPERATURE, "max_output_tokens": WORKER_MAX_TOKENS}
    if stage in (Stage.FEASIBILITY, Stage.SELECTION, Stage.EVALUATION):
        return {"temperature": POST_GENERATION_TEMPERATURE, "max_output_tokens": JUDGE_MAX_TOKENS}
    return {"temperature": POST_GENERATION_TEMPERATURE, "max_output_tokens": WORKER_MAX_TOKENS}


@dataclass(frozen=True)
class Message:
    role: str
    content: str

    def __post_init__(self):
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown message role {self.role!r}")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    temperature: float
    max_output_tokens: int
    tags: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if not self.messages:
            raise ValueError("request must contain at least one message")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_output_tokens <= 0:
            raise ValueError("max_output_tokens must be positive")

    @property
    def stage(self) -> str | None:
        return dict(self.tags).get("stage")


def make_request(
    prompt_or_messages,
    stage: Stage,
    overrides: Mapping[str, object] | None = None,
    **tags: str,
) -> ChatRequest:
    """Build a request from a user prompt string or explicit message list."""
    if isinstance(prompt_or_messages, str):
        messages = (Message("user", prompt_or_messages),)
    else:
        messages = tuple(prompt_or_messages)
    params = stage_defaults(stage)
    if overrides:
        params.update(overrides)
    all_tags = {"stage": stage.value, **tags}
    return ChatRequest(
        messages=messages,
        temperature=float(params["temperature"]),
        max_output_tokens=int(params["max_output_tokens"]),
        tags=tuple(sorted(all_tags.items())),
    )


def request_digest(request: ChatRequest) -> str:
    """Content hash identifying a request for record/replay. Tags are excluded:
    they are logging metadata and must not affect matching."""
    payload = {
        "messages": [{"role": m.role, "content": m.content} for m in request.messages],
        "temperature": request.temperature,
        "max_output_tokens": request.max_output_tokens,
    }
    blob = json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Provider(Protocol):
    def complete(self, request: ChatRequest) -> str: ...


@dataclass
class ProviderConfig:
    endpoint: str
    model: str = DEFAULT_MODEL
    api_key: str = ""
    max_attempts: int = 3
    backoff: float = 1.0

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")


def config_from_env(role: str = "worker", **overrides) -> ProviderConfig:
    """Worker config from IDEAFORGE_API_*; judge config from IDEAFORGE_JUDGE_API_*."""
    prefix = "IDEAFORGE_JUDGE_API" if role == "judge" else "IDEAFORGE_API"
    base = os.environ.get(f"{prefix}_BASE") or os.environ.get("IDEAFORGE_API_BASE")
    key = os.environ.get(f"{prefix}_KEY") or os.environ.get("IDEAFORGE_API_KEY", "")
    if not base:
        raise ProviderError(
            f"no endpoint configured: set {prefix}_BASE (and {prefix}_KEY) in the environment"
        )
    return ProviderConfig(endpoint=base, api_key=key, **overrides)


_TRANSIENT_STATUSES = frozenset({408, 409, 429, 500, 502, 503, 504})


class HTTPProvider:
    """Standard chat-completions endpoint over HTTPS, with bounded retries.

    transport is injectable for tests; sleep likewise so retry timing is
    testable without waiting.
    """

    def __init__(
        self,
        config: ProviderConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=config.endpoint,
            timeout=httpx.Timeout(120.0, connect=10.0),
            transport=transport,
        )

    def close(self):
        self._client.close()

    def complete(self, request: ChatRequest) -> str:
        if not self.config.api_key:
            raise ProviderError("live provider requires an API key")
        body = {
            "model": self.config.model,
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_tokens": request.max_output_tokens,
        }
        headers = {"Authorization": f"Bearer {self.config.api_key}"}
        last_error: Exception | None = None
        for attempt in range(1, self.config.max_attempts + 1):
            try:
                response = self._client.post("/chat/completions", json=body, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                log.warning("attempt %d/%d failed: %s", attempt, self.config.max_attempts, exc)
            else:
                if response.status_code == 401:
                    raise ProviderError("authentication failed (HTTP 401)")
                if response.status_code == 200:
                    log.info(
                        "attempt %d/%d succeeded (stage=%s)",
                        attempt,
                        self.config.max_attempts,
                        request.stage,
                    )
                    return _extract_text(response)
                last_error = ProviderError(f"HTTP {response.status_code}: {response.text[:200]}")
                if response.status_code not in _TRANSIENT_STATUSES:
                    raise last_error
                log.warning(
                    "attempt %d/%d got HTTP %d",
                    attempt,
                    self.config.max_attempts,
                    response.status_code,
                )
            if attempt < self.config.max_attempts:
                self._sleep(self.config.backoff * (2 ** (attempt - 1)))
        raise ProviderError(
            f"exhausted {self.config.max_attempts} attempts: {last_error}"
        ) from last_error


def _extract_text(response: httpx.Response) -> str:
    try:
        payload = response.json()
        text = payload["choices"][0]["message"]["content"]
    except (json.JSONDecodeError, KeyError, IndexError, TypeError) as exc:
        raise ProviderError(f"malformed completion response: {exc}") from exc
    if not isinstance(text, str):
        raise ProviderError("completion response contained no text")
    return text


@dataclass(frozen=True)
class TranscriptEntry:
    digest: str
    stage: str | None
    request: dict
    response: str

    def to_json(self) -> str:
        return json.dumps(
            {
                "digest": self.digest,
                "stage": self.stage,
                "request": self.request,
                "response": self.response,
            },
            ensure_ascii=False,
        )


def entry_for(request: ChatRequest, response: str) -> TranscriptEntry:
    return TranscriptEntry(
        digest=request_digest(request),
        stage=request.stage,
        request={
            "messages": [{"role": m.role, "content": m.content} for m in request.messages],
            "temperature": request.temperature,
            "max_output_tokens": request.max_output_tokens,
        },
        response=response,
    )


def load_transcript(path) -> list[TranscriptEntry]:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                entries.append(
                    TranscriptEntry(
                        digest=raw["digest"],
                        stage=raw.get("stage"),
                        request=raw.get("request", {}),
                        response=raw["response"],
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ProviderError(f"{path}:{lineno}: malformed transcript line: {exc}") from exc
    return entries


class RecordingProvider:
    """Wraps a live provider and appends every exchange to a transcript file."""

    def __init__(self, inner: Provider, path):
        self.inner = inner
        self.path = Path(path)
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        response = self.inner.complete(request)
        line = entry_for(request, response).to_json() + "\n"
        data = line.encode("utf-8")
        with self._lock:
            fd = os.open(self.path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
            try:
                os.write(fd, data)
            finally:
                os.close(fd)
        return response


class ReplayProvider:
    """Serves recorded responses by request digest, never touching the network.

    Responses recorded under the same digest form a FIFO queue; once a queue
    runs dry the last response repeats, so a rerun that asks one extra
    identical question still replays. Unknown digests raise ReplayMissError.
    """

    def __init__(self, entries: Iterable[TranscriptEntry]):
        self._queues: dict[str, deque[str]] = {}
        self._last: dict[str, str] = {}
        self._lock = threading.Lock()
        for entry in entries:
            self._queues.setdefault(entry.digest, deque()).append(entry.response)
            self._last[entry.digest] = entry.response

    @classmethod
    def from_file(cls, path) -> "ReplayProvider":
        return cls(load_transcript(path))

    def complete(self, request: ChatRequest) -> str:
        digest = request_digest(request)
        with self._lock:
            if digest not in self._queues:
                raise ReplayMissError(digest, request.stage)
            queue = self._queues[digest]
            if queue:
                return queue.popleft()
            return self._last[digest]


class QueueProvider:
    """Hands out scripted responses in order, ignoring request content.

    Test and demo helper for driving a pipeline stage with known completions,
    typically wrapped in a RecordingProvider to produce a replayable transcript.
    """

    def __init__(self, responses: Iterable[str]):
        self._responses = deque(responses)
        self.requests: list[ChatRequest] = []
        self._lock = threading.Lock()

    def complete(self, request: ChatRequest) -> str:
        with self._lock:
            self.requests.append(request)
            if not self._responses:
                raise ProviderError("scripted provider ran out of responses")
            return self._responses.popleft()


@dataclass
class ProviderPair:
    """The two independently configured providers a full run needs: the worker
    generates/validates, the judge compares."""

    worker: Provider
    judge: Provider

    @classmethod
    def replay(cls, path) -> "ProviderPair":
        provider = ReplayProvider.from_file(path)
        return cls(worker=provider, judge=provider)
