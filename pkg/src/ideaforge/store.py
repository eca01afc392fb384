"""Run-directory persistence.

One directory holds everything a run produces. Logs are append-only JSONL
written with single O_APPEND writes so a line is either complete or absent;
artifacts are written temp-then-rename. Export produces a deterministic
archive: sorted member order, zeroed timestamps, no compression.
"""

from __future__ import annotations

import json
import os
import threading
import zipfile
from pathlib import Path
from typing import Iterable, Iterator

from .arena import MatchRecord, RatingTable, Standings
from .errors import StoreError
from .ideas import Idea, deserialize_idea, serialize_idea
from .validation import SummaryStep, ValidationRecord

IDEAS_DIR = "ideas"
TRACES_DIR = "traces"
SUMMARIES_DIR = "summaries"
MATCHES_LOG = "matches.jsonl"
JUDGMENTS_LOG = "judgments.jsonl"
SESSIONS_LOG = "sessions.jsonl"
TRANSCRIPT_LOG = "transcript.jsonl"
RATINGS_FILE = "ratings.json"
STANDINGS_FILE = "standings.json"
PAIRS_FILE = "pairs.json"
STUDY_FILE = "study.json"

_STANDARD_LOGS = (MATCHES_LOG, JUDGMENTS_LOG, SESSIONS_LOG, TRANSCRIPT_LOG)


class RunStore:
    def __init__(self, root, create: bool = False):
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        if not self.root.is_dir():
            raise StoreError(f"run directory does not exist: {self.root}")
        self._write_lock = threading.Lock()

    # -- low-level ---------------------------------------------------------

    def path(self, *parts) -> Path:
        return self.root.joinpath(*parts)

    def append_line(self, log_name: str, record: dict):
        """Atomic log append: one os.write of a full line on an O_APPEND fd."""
        line = json.dumps(record, ensure_ascii=False) + "\n"
        data = line.encode("utf-8")
        path = self.path(log_name)
        path.parent.mkdir(parents=True, exist_ok=True)
        with self._write_lock:
            fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_APPEND, 0o644)
            try:
                os.write(fd, data)
            finally:
                os.close(fd)

    def read_log(self, log_name: str) -> list[dict]:
        path = self.path(log_name)
        if not path.exists():
            return []
        records = []
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    records.append(json.loads(line))
                except json.JSONDecodeError as exc:
                    raise StoreError(f"{path}:{lineno}: corrupt log line: {exc}") from exc
        return records

    def write_text(self, rel_path: str, text: str):
        """Temp-then-rename artifact write; readers never see partial files."""
        path = self.path(rel_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(text, encoding="utf-8")
        os.replace(tmp, path)

    def write_json(self, rel_path: str, payload):
        self.write_text(rel_path, json.dumps(payload, ensure_ascii=False, indent=2) + "\n")

    def read_json(self, rel_path: str):
        path = self.path(rel_path)
        if not path.exists():
            raise StoreError(f"missing artifact: {path}")
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    # -- ideas -------------------------------------------------------------

    def save_idea(self, idea: Idea):
        self.write_text(f"{IDEAS_DIR}/{idea.topic_id}/{idea.id}.json", serialize_idea(idea))

    def load_ideas(self, topic_id: str | None = None) -> list[Idea]:
        base = self.path(IDEAS_DIR)
        if topic_id is not None:
            base = base / topic_id
        if not base.is_dir():
            return []
        ideas = []
        for path in sorted(base.rglob("*.json")):
            ideas.append(deserialize_idea(path.read_text(encoding="utf-8")))
        return ideas

    def load_idea(self, idea_id: str) -> Idea:
        base = self.path(IDEAS_DIR)
        if base.is_dir():
            for path in sorted(base.rglob(f"{idea_id}.json")):
                return deserialize_idea(path.read_text(encoding="utf-8"))
        raise StoreError(f"unknown idea: {idea_id}")

    # -- validation artifacts ---------------------------------------------

    def save_trace(self, record: ValidationRecord):
        self.write_json(f"{TRACES_DIR}/{record.idea_id}.json", record.to_dict())
        if record.summary:
            self.save_summary(record.idea_id, record.summary)

    def load_trace(self, idea_id: str) -> ValidationRecord:
        return ValidationRecord.from_dict(self.read_json(f"{TRACES_DIR}/{idea_id}.json"))

    def has_trace(self, idea_id: str) -> bool:
        return self.path(TRACES_DIR, f"{idea_id}.json").exists()

    def list_traces(self) -> list[str]:
        base = self.path(TRACES_DIR)
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.json"))

    def save_summary(self, idea_id: str, steps: Iterable[SummaryStep]):
        self.write_json(f"{SUMMARIES_DIR}/{idea_id}.json", [s.to_dict() for s in steps])

    def load_summary(self, idea_id: str) -> list[SummaryStep] | None:
        path = self.path(SUMMARIES_DIR, f"{idea_id}.json")
        if not path.exists():
            return None
        return [SummaryStep.from_dict(raw) for raw in self.read_json(f"{SUMMARIES_DIR}/{idea_id}.json")]

    # -- matches and ratings ----------------------------------------------

    def append_match(self, record: MatchRecord):
        self.append_line(MATCHES_LOG, record.to_dict())

    def load_matches(self) -> list[MatchRecord]:
        return [MatchRecord.from_dict(raw) for raw in self.read_log(MATCHES_LOG)]

    def save_ratings(self, table: RatingTable):
        self.write_json(RATINGS_FILE, table.to_dict())

    def save_standings(self, standings: Standings):
        self.write_json(STANDINGS_FILE, standings.to_dict())

    # -- annotation --------------------------------------------------------

    def save_pairs(self, pairs: list[dict]):
        self.write_json(PAIRS_FILE, pairs)

    def load_pairs(self) -> list[dict]:
        path = self.path(PAIRS_FILE)
        if not path.exists():
            return []
        return self.read_json(PAIRS_FILE)

    def append_judgment(self, record: dict):
        self.append_line(JUDGMENTS_LOG, record)

    def load_judgments(self) -> list[dict]:
        return self.read_log(JUDGMENTS_LOG)

    def append_session_event(self, record: dict):
        self.append_line(SESSIONS_LOG, record)

    def load_session_events(self) -> list[dict]:
        return self.read_log(SESSIONS_LOG)


def export_run(store: RunStore, out_path) -> Path:
    """Zip the run directory deterministically; returns the archive path.

    Member order is sorted, timestamps are zeroed, and members are stored
    uncompressed, so identical directory content yields identical bytes.
    A manifest records which standard logs are present or absent.
    """
    out_path = Path(out_path)
    files = sorted(
        p.relative_to(store.root).as_posix()
        for p in store.root.rglob("*")
        if p.is_file() and not p.name.endswith(".tmp")
    )
    manifest = {
        "files": files,
        "absent_logs": [name for name in _STANDARD_LOGS if not store.path(name).exists()],
    }
    with zipfile.ZipFile(out_path, "w", compression=zipfile.ZIP_STORED) as zf:
        info = zipfile.ZipInfo("manifest.json", date_time=(1980, 1, 1, 0, 0, 0))
        zf.writestr(info, json.dumps(manifest, ensure_ascii=False, indent=2) + "\n")
        for rel in files:
            info = zipfile.ZipInfo(rel, date_time=(1980, 1, 1, 0, 0, 0))
            info.external_attr = 0o644 << 16
            zf.writestr(info, store.path(rel).read_bytes())
    return out_path


def import_run(archive_path, dest) -> RunStore:
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    with zipfile.ZipFile(archive_path) as zf:
        for member in zf.namelist():
            if member == "manifest.json":
                continue
            target = dest / member
            resolved = target.resolve()
            if not str(resolved).startswith(str(dest.resolve()) + os.sep):
                raise StoreError(f"archive member escapes destination: {member}")
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(zf.read(member))
    return RunStore(dest)
