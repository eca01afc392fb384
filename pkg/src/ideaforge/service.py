"""HTTP API for human annotation and study sessions.

The server is a thin veneer over the run store: every mutation appends to a
log, and startup replays the logs, so the served state always equals the
persisted state. Annotators see pairs in a presentation order derived from a
seeded hash; nothing in any payload reveals experimental condition,
provenance, or which side is which.
"""

from __future__ import annotations

import hashlib
from datetime import datetime, timedelta, timezone
from threading import Lock
from typing import Callable

from fastapi import Body, FastAPI, HTTPException, Query

from . import metrics
from .arena import elo_ratings
from .databank import Registry, snippet
from .errors import StatsError, StoreError
from .ideas import Idea
from .store import STUDY_FILE, RunStore
from .validation import ValidationRecord

ANNOTATION_CRITERIA = (
    "Significance",
    "Novelty",
    "Feasibility",
    "Expected Effectiveness",
    "Overall",
)
JUDGMENT_CODES = ("A", "Tie", "B")
FEEDBACK_KEYS = ("reference_ideas", "data_segments", "validation_processes")
FEEDBACK_VALUES = ("VeryHelpful", "SomewhatHelpful", "NotHelpful")
SESSION_TOPIC_MINUTES = 20
OFFERED_TOPIC_COUNT = 4
CHOSEN_TOPIC_COUNT = 2
REFERENCE_IDEA_COUNT = 3
SNIPPET_LINES = 10

_FLIP = {"A": "B", "B": "A", "Tie": "Tie"}


def presented_order(seed: int, pair_id: str, annotator: str) -> str:
    """Deterministic per-(pair, annotator) coin flip: "AB" or "BA"."""
    digest = hashlib.sha256(f"{seed}:{pair_id}:{annotator}".encode("utf-8")).digest()
    return "AB" if digest[0] % 2 == 0 else "BA"


def blinded_idea(idea: Idea) -> dict:
    """What annotators and participants may see of an idea."""
    return {
        "id": idea.id,
        "topic_id": idea.topic_id,
        "research_question": idea.research_question,
        "theory": idea.theory,
        "hypotheses": list(idea.hypotheses),
    }


class _State:
    def __init__(self, store: RunStore):
        self.store = store
        self.lock = Lock()
        self.pairs = {p["pair_id"]: p for p in store.load_pairs()}
        self.judged: dict[str, set[str]] = {pid: set() for pid in self.pairs}
        self.counts: dict[str, int] = {pid: 0 for pid in self.pairs}
        for record in store.load_judgments():
            pid = record["pair_id"]
            if pid in self.pairs:
                self.judged[pid].add(record["annotator"])
                self.counts[pid] += 1
        self.reservations: dict[str, str] = {}
        self.sessions: dict[str, dict] = {}
        for event in store.load_session_events():
            self._apply_session_event(event)

    def _apply_session_event(self, event: dict):
        kind = event.get("event")
        if kind == "session_opened":
            session = dict(event["session"])
            session["ideas"] = []
            session["feedback"] = None
            self.sessions[session["session_id"]] = session
        elif kind == "idea_submitted":
            session = self.sessions.get(event["session_id"])
            if session is not None:
                session["ideas"].append(
                    {
                        "topic_id": event["topic_id"],
                        "text": event["text"],
                        "late": event["late"],
                        "submitted_at": event["submitted_at"],
                    }
                )
        elif kind == "feedback_submitted":
            session = self.sessions.get(event["session_id"])
            if session is not None:
                session["feedback"] = event["values"]


def create_app(
    store: RunStore,
    registry: Registry | None = None,
    clock: Callable[[], datetime] | None = None,
    seed: int = 0,
) -> FastAPI:
    app = FastAPI(title="idea annotation service")
    state = _State(store)
    now = clock or (lambda: datetime.now(timezone.utc))

    def _idea_or_404(idea_id: str) -> Idea:
        try:
            return store.load_idea(idea_id)
        except StoreError:
            raise HTTPException(404, f"unknown idea {idea_id!r}")

    def _snippets_for(record: ValidationRecord | None) -> list[dict]:
        if (
            record is None
            or registry is None
            or record.verdict is None
            or not record.verdict.feasible
        ):
            return []
        out = []
        for index in record.verdict.data_used:
            entry = registry.entry(index)
            out.append(
                {
                    "index": index,
                    "name": entry.name,
                    "lines": snippet(entry, registry.root, SNIPPET_LINES),
                }
            )
        return out

    def _idea_payload(idea: Idea) -> dict:
        record = store.load_trace(idea.id) if store.has_trace(idea.id) else None
        payload = blinded_idea(idea)
        payload["snippets"] = _snippets_for(record)
        payload["trace"] = [s.to_dict() for s in record.trace] if record else []
        summary = store.load_summary(idea.id)
        if summary is None and record is not None and record.summary:
            summary = record.summary
        payload["summary"] = [s.to_dict() for s in summary] if summary else []
        return payload

    # -- annotation --------------------------------------------------------

    @app.get("/api/pairs/next")
    def next_pair(annotator: str = Query(min_length=1)):
        with state.lock:
            reserved = state.reservations.get(annotator)
            if reserved is not None and annotator not in state.judged.get(reserved, set()):
                pair_id = reserved
            else:
                eligible = [
                    pid for pid in state.pairs if annotator not in state.judged[pid]
                ]
                if not eligible:
                    raise HTTPException(404, "no eligible pair for this annotator")
                pending = {}
                for other, pid in state.reservations.items():
                    if other != annotator and pid in state.pairs:
                        pending[pid] = pending.get(pid, 0) + 1
                pair_id = min(
                    eligible, key=lambda pid: (state.counts[pid] + pending.get(pid, 0), pid)
                )
                state.reservations[annotator] = pair_id
        pair = state.pairs[pair_id]
        order = presented_order(seed, pair_id, annotator)
        first_id, second_id = (
            (pair["idea_a"], pair["idea_b"]) if order == "AB" else (pair["idea_b"], pair["idea_a"])
        )
        return {
            "pair_id": pair_id,
            "criteria": list(ANNOTATION_CRITERIA),
            "first": blinded_idea(_idea_or_404(first_id)),
            "second": blinded_idea(_idea_or_404(second_id)),
        }

    @app.post("/api/judgments")
    def submit_judgment(payload: dict = Body(...)):
        pair_id = payload.get("pair_id")
        annotator = payload.get("annotator")
        values = payload.get("values")
        if not isinstance(pair_id, str) or pair_id not in state.pairs:
            raise HTTPException(404, f"unknown pair {pair_id!r}")
        if not isinstance(annotator, str) or not annotator:
            raise HTTPException(400, "missing annotator")
        if not isinstance(values, dict) or set(values) != set(ANNOTATION_CRITERIA):
            raise HTTPException(
                400, f"values must cover exactly the criteria {list(ANNOTATION_CRITERIA)}"
            )
        for criterion, code in values.items():
            if code not in JUDGMENT_CODES:
                raise HTTPException(
                    400, f"code {code!r} for {criterion!r} not in {list(JUDGMENT_CODES)}"
                )
        order = presented_order(seed, pair_id, annotator)
        canonical = (
            dict(values) if order == "AB" else {c: _FLIP[v] for c, v in values.items()}
        )
        with state.lock:
            if annotator in state.judged[pair_id]:
                raise HTTPException(409, "duplicate judgment for this pair")
            record = {
                "pair_id": pair_id,
                "annotator": annotator,
                "order": order,
                "values": canonical,
                "submitted_at": now().isoformat(),
            }
            store.append_judgment(record)
            state.judged[pair_id].add(annotator)
            state.counts[pair_id] += 1
            if state.reservations.get(annotator) == pair_id:
                del state.reservations[annotator]
        return {"stored": True, "pair_id": pair_id}

    # -- idea browsing -----------------------------------------------------

    @app.get("/api/ideas/{idea_id}")
    def get_idea(idea_id: str):
        return _idea_payload(_idea_or_404(idea_id))

    # -- study sessions ----------------------------------------------------

    def _study_config() -> dict:
        try:
            return store.read_json(STUDY_FILE)
        except StoreError:
            raise HTTPException(400, "study is not configured for this run")

    @app.post("/api/sessions")
    def open_session(payload: dict = Body(...)):
        study = _study_config()
        offered = [t["id"] for t in study["offered_topics"]]
        if len(offered) != OFFERED_TOPIC_COUNT:
            raise HTTPException(500, "study config must offer exactly 4 topics")
        participant = payload.get("participant")
        chosen = payload.get("chosen_topics")
        if not isinstance(participant, str) or not participant:
            raise HTTPException(400, "missing participant")
        if (
            not isinstance(chosen, list)
            or len(chosen) != CHOSEN_TOPIC_COUNT
            or len(set(chosen)) != CHOSEN_TOPIC_COUNT
        ):
            raise HTTPException(400, f"choose exactly {CHOSEN_TOPIC_COUNT} distinct topics")
        unknown = [t for t in chosen if t not in offered]
        if unknown:
            raise HTTPException(400, f"topics not offered: {unknown}")
        references = study.get("references", {})
        eligible = [t for t in chosen if t in references]
        if not eligible:
            raise HTTPException(400, "no chosen topic has reference ideas configured")
        pick = hashlib.sha256(f"{seed}:{participant}".encode("utf-8")).digest()[0]
        reference_topic = sorted(eligible)[pick % len(eligible)]

        opened = now()
        deadlines = {
            topic: (opened + timedelta(minutes=SESSION_TOPIC_MINUTES * (k + 1))).isoformat()
            for k, topic in enumerate(chosen)
        }
        with state.lock:
            session_id = f"s-{len(state.sessions) + 1:04d}"
            session = {
                "session_id": session_id,
                "participant": participant,
                "chosen_topics": list(chosen),
                "reference_topic": reference_topic,
                "deadlines": deadlines,
                "opened_at": opened.isoformat(),
            }
            store.append_session_event({"event": "session_opened", "session": session})
            state._apply_session_event({"event": "session_opened", "session": session})

        ref_ids = references[reference_topic]
        if len(ref_ids) != REFERENCE_IDEA_COUNT:
            raise HTTPException(500, "study config must list exactly 3 reference ideas")
        return {
            **session,
            "references": [_idea_payload(_idea_or_404(i)) for i in ref_ids],
        }

    def _session_or_404(session_id: str) -> dict:
        session = state.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return session

    @app.post("/api/sessions/{session_id}/ideas")
    def submit_idea(session_id: str, payload: dict = Body(...)):
        session = _session_or_404(session_id)
        topic_id = payload.get("topic_id")
        text = payload.get("text")
        if topic_id not in session["chosen_topics"]:
            raise HTTPException(400, f"topic {topic_id!r} was not chosen in this session")
        if not isinstance(text, str) or not text.strip():
            raise HTTPException(400, "idea text must be non-empty")
        with state.lock:
            if any(i["topic_id"] == topic_id for i in session["ideas"]):
                raise HTTPException(409, "an idea for this topic was already submitted")
            submitted = now()
            deadline = datetime.fromisoformat(session["deadlines"][topic_id])
            event = {
                "event": "idea_submitted",
                "session_id": session_id,
                "topic_id": topic_id,
                "text": text,
                "late": submitted > deadline,
                "submitted_at": submitted.isoformat(),
            }
            store.append_session_event(event)
            state._apply_session_event(event)
        return {"stored": True, "late": event["late"]}

    @app.post("/api/sessions/{session_id}/feedback")
    def submit_feedback(session_id: str, payload: dict = Body(...)):
        session = _session_or_404(session_id)
        if not isinstance(payload, dict) or set(payload) != set(FEEDBACK_KEYS):
            raise HTTPException(400, f"feedback must cover exactly {list(FEEDBACK_KEYS)}")
        for key, value in payload.items():
            if value not in FEEDBACK_VALUES:
                raise HTTPException(
                    400, f"feedback {key!r} value {value!r} not in {list(FEEDBACK_VALUES)}"
                )
        with state.lock:
            if session["feedback"] is not None:
                raise HTTPException(409, "feedback was already submitted")
            event = {
                "event": "feedback_submitted",
                "session_id": session_id,
                "values": dict(payload),
            }
            store.append_session_event(event)
            state._apply_session_event(event)
        return {"stored": True}

    # -- statistics --------------------------------------------------------

    @app.get("/api/stats")
    def stats():
        judgments = store.load_judgments()
        alpha: dict[str, float | None] = {}
        for criterion in ANNOTATION_CRITERIA:
            triples = [
                (r["pair_id"], r["annotator"], r["values"][criterion])
                for r in judgments
                if criterion in r.get("values", {})
            ]
            try:
                alpha[criterion] = metrics.krippendorff_alpha(
                    metrics.matrix_from_triples(triples)
                )
            except StatsError:
                alpha[criterion] = None
        defined = [v for v in alpha.values() if v is not None]
        alpha_average = sum(defined) / len(defined) if defined else None

        win_rate = {}
        ztest = {}
        for criterion in ANNOTATION_CRITERIA:
            codes = [r["values"][criterion] for r in judgments if criterion in r.get("values", {})]
            total = len(codes)
            a_wins = codes.count("A")
            b_wins = codes.count("B")
            ties = codes.count("Tie")
            if total:
                win_rate[criterion] = {
                    "A": a_wins / total,
                    "Tie": ties / total,
                    "B": b_wins / total,
                    "n": total,
                }
            else:
                win_rate[criterion] = None
            if a_wins + b_wins > 0:
                result = metrics.win_rate_ztest(a_wins, b_wins)
                ztest[criterion] = {"z": result.z, "p": result.p}
            else:
                ztest[criterion] = None

        matches = store.load_matches()
        elo = elo_ratings(matches, seed=seed).to_dict() if matches else None
        return {
            "judgments": len(judgments),
            "alpha": {"per_criterion": alpha, "average": alpha_average},
            "win_rate": win_rate,
            "ztest": ztest,
            "elo": elo,
        }

    return app
