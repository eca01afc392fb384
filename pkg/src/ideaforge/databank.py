"""Dataset catalog: loading, validation, and the metadata text injected into prompts.

The catalog is a ``registry.json`` manifest next to a ``datasets/`` directory of
CSV payloads. Entries carry stable 1-based global indices; prompts and stored
feasibility verdicts refer to datasets by these numbers, so indices are assigned
in manifest order and never renumbered.
"""

from __future__ import annotations

import csv
import enum
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import RegistryError

MANIFEST_NAME = "registry.json"

# Feasibility limits on how many datasets one validation may use.
MAX_DATASETS_PER_IDEA = 3
MAX_TEXTUAL_PER_IDEA = 1

DEFAULT_REFERENCE_YEAR = 2025


class DatasetKind(enum.Enum):
    TEXTUAL = "textual"
    PANEL = "panel"
    CROSS_SECTIONAL = "cross_sectional"


_KIND_HEADERS = {
    DatasetKind.TEXTUAL: "Textual data:",
    DatasetKind.PANEL: "Panel data:",
    DatasetKind.CROSS_SECTIONAL: "Cross-sectional data:",
}


@dataclass(frozen=True)
class DatasetEntry:
    """One catalog entry: a named CSV payload plus its one-to-two-sentence description."""

    index: int
    name: str
    description: str
    kind: DatasetKind
    path: str  # relative to the registry root
    year: int | None = None  # reference year, cross-sectional only

    def resolve_path(self, root: Path) -> Path:
        return Path(root) / self.path


@dataclass(frozen=True)
class Registry:
    """Immutable, index-ordered dataset catalog."""

    entries: tuple[DatasetEntry, ...]
    root: Path

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def entry(self, index: int) -> DatasetEntry:
        for e in self.entries:
            if e.index == index:
                return e
        raise RegistryError(f"no dataset with index {index} (catalog has {len(self)} entries)")

    def payload_path(self, index: int) -> Path:
        return self.entry(index).resolve_path(self.root)


def _parse_entry(raw: dict, pos: int) -> DatasetEntry:
    try:
        index = raw["index"]
        name = raw["name"]
        description = raw["description"]
        kind_value = raw["kind"]
        path = raw["path"]
    except KeyError as exc:
        raise RegistryError(f"manifest entry {pos}: missing key {exc}") from None
    try:
        kind = DatasetKind(kind_value)
    except ValueError:
        raise RegistryError(
            f"manifest entry {pos}: unknown kind {kind_value!r} "
            f"(expected one of {[k.value for k in DatasetKind]})"
        ) from None
    year = raw.get("year")
    if kind is DatasetKind.CROSS_SECTIONAL and year is None:
        year = DEFAULT_REFERENCE_YEAR
    return DatasetEntry(
        index=int(index), name=name, description=description, kind=kind, path=path, year=year
    )


def load_registry(root: str | Path) -> Registry:
    """Load and fully validate the catalog under ``root``.

    Checks index contiguity (1..N), name uniqueness, and that every payload is a
    readable CSV with a header row.
    """
    root = Path(root)
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise RegistryError(f"missing manifest: {manifest}")
    try:
        raw = json.loads(manifest.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise RegistryError(f"manifest is not valid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise RegistryError("manifest must be a JSON array of entries")

    entries = [_parse_entry(item, pos) for pos, item in enumerate(raw)]

    indices = [e.index for e in entries]
    if indices != list(range(1, len(entries) + 1)):
        raise RegistryError(f"indices must be contiguous 1..{len(entries)}, got {indices}")
    names = [e.name for e in entries]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise RegistryError(f"duplicate dataset names: {dupes}")

    for entry in entries:
        payload = entry.resolve_path(root)
        if not payload.is_file():
            raise RegistryError(f"dataset {entry.index} ({entry.name}): missing file {payload}")
        try:
            with payload.open(encoding="utf-8", newline="") as fh:
                header = next(csv.reader(fh), None)
        except OSError as exc:
            raise RegistryError(f"dataset {entry.index} ({entry.name}): unreadable: {exc}") from exc
        except (csv.Error, UnicodeDecodeError) as exc:
            raise RegistryError(f"dataset {entry.index} ({entry.name}): not parseable CSV: {exc}") from exc
        if not header:
            raise RegistryError(f"dataset {entry.index} ({entry.name}): no header row")

    return Registry(entries=tuple(entries), root=root)


def serialize_registry(registry: Registry) -> str:
    """Canonical manifest text; byte-stable, round-trips through load_registry."""
    payload = []
    for e in registry.entries:
        item: dict = {
            "index": e.index,
            "name": e.name,
            "description": e.description,
            "kind": e.kind.value,
            "path": e.path,
        }
        if e.kind is DatasetKind.CROSS_SECTIONAL:
            item["year"] = e.year
        payload.append(item)
    return json.dumps(payload, indent=2, ensure_ascii=False) + "\n"


def save_registry(registry: Registry, root: str | Path | None = None) -> Path:
    """Write the canonical manifest under ``root`` (default: the registry's own root)."""
    root = Path(root) if root is not None else registry.root
    manifest = root / MANIFEST_NAME
    manifest.write_text(serialize_registry(registry), encoding="utf-8")
    return manifest


def metadata_block(registry: Registry) -> str:
    """The grouped dataset listing injected into prompts.

    One ``<index>. <name>: <description>`` line per entry, grouped under kind
    headers in index order. Pure function of the registry: identical catalogs
    produce identical bytes.
    """
    if not len(registry):
        raise RegistryError("cannot render metadata for an empty registry")
    lines: list[str] = []
    for kind in (DatasetKind.TEXTUAL, DatasetKind.PANEL, DatasetKind.CROSS_SECTIONAL):
        group = [e for e in registry if e.kind is kind]
        if not group:
            continue
        lines.append(_KIND_HEADERS[kind])
        for e in group:
            lines.append(f"{e.index}. {e.name}: {e.description}")
    return "\n".join(lines)


def snippet(entry: DatasetEntry, root: str | Path, n: int = 10) -> str:
    """First ``min(n, line count)`` raw lines of the payload, header included, no reflow."""
    if n <= 0:
        return ""
    path = entry.resolve_path(Path(root))
    try:
        with path.open(encoding="utf-8", newline="") as fh:
            lines = []
            for i, line in enumerate(fh):
                if i >= n:
                    break
                lines.append(line)
    except OSError as exc:
        raise RegistryError(f"dataset {entry.index} ({entry.name}): unreadable: {exc}") from exc
    return "".join(lines)


def resolve_indices(registry: Registry, indices: list[int]) -> list[DatasetEntry]:
    """Map feasibility-check dataset numbers to entries, enforcing selection limits.

    At most MAX_DATASETS_PER_IDEA entries, at most MAX_TEXTUAL_PER_IDEA textual.
    Entries come back in the given order.
    """
    if not indices:
        raise RegistryError("empty dataset selection")
    if len(indices) > MAX_DATASETS_PER_IDEA:
        raise RegistryError(
            f"selected {len(indices)} datasets, limit is {MAX_DATASETS_PER_IDEA}: {indices}"
        )
    entries = [registry.entry(i) for i in indices]
    textual = [e for e in entries if e.kind is DatasetKind.TEXTUAL]
    if len(textual) > MAX_TEXTUAL_PER_IDEA:
        raise RegistryError(
            f"selected {len(textual)} textual datasets, limit is {MAX_TEXTUAL_PER_IDEA}: "
            f"{[e.index for e in textual]}"
        )
    return entries


@dataclass
class PayloadCheck:
    index: int
    name: str
    ok: bool
    issues: list[str] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


@dataclass
class PayloadReport:
    checks: list[PayloadCheck]

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def failures(self) -> list[PayloadCheck]:
        return [c for c in self.checks if not c.ok]


def validate_payloads(registry: Registry) -> PayloadReport:
    """Schema checks on every payload; failures become report items, not exceptions.

    Panel data must carry a ``year`` column; cross-sectional data must have one
    row per country. A header-only CSV is loadable and flagged as a warning.
    """
    checks: list[PayloadCheck] = []
    for entry in registry:
        check = PayloadCheck(index=entry.index, name=entry.name, ok=True)
        checks.append(check)
        path = entry.resolve_path(registry.root)
        try:
            with path.open(encoding="utf-8", newline="") as fh:
                reader = csv.reader(fh)
                header = next(reader, None)
                rows = list(reader)
        except (OSError, csv.Error, UnicodeDecodeError) as exc:
            check.ok = False
            check.issues.append(f"unreadable or unparseable CSV: {exc}")
            continue
        if not header:
            check.ok = False
            check.issues.append("no header row")
            continue
        columns = [c.strip().lower() for c in header]
        if not rows:
            check.warnings.append("no data rows (header only)")
        if entry.kind is DatasetKind.PANEL and "year" not in columns:
            check.ok = False
            check.issues.append(f"panel data missing 'year' column (has {columns})")
        if entry.kind is DatasetKind.CROSS_SECTIONAL:
            if "country" not in columns:
                check.ok = False
                check.issues.append(f"cross-sectional data missing 'country' column (has {columns})")
            else:
                col = columns.index("country")
                seen: dict[str, int] = {}
                for row in rows:
                    if col < len(row):
                        seen[row[col]] = seen.get(row[col], 0) + 1
                dupes = sorted(c for c, n in seen.items() if n > 1)
                if dupes:
                    check.ok = False
                    check.issues.append(f"more than one row per country: {dupes}")
    return PayloadReport(checks=checks)


def read_csv_dicts(entry: DatasetEntry, root: str | Path) -> list[dict]:
    """Payload rows as dicts; convenience for demos and report tooling."""
    path = entry.resolve_path(Path(root))
    with path.open(encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))


def csv_header(text: str) -> list[str]:
    return next(csv.reader(io.StringIO(text)), [])
