"""Catalog loading, metadata rendering, and feasibility index resolution."""

import json

import pytest

from ideaforge.databank import (
    DatasetEntry,
    DatasetKind,
    MANIFEST_NAME,
    Registry,
    load_registry,
    metadata_block,
    resolve_indices,
    save_registry,
    serialize_registry,
    snippet,
    validate_payloads,
)
from ideaforge.errors import RegistryError


def write_minimal(root, entries):
    (root / "datasets").mkdir(exist_ok=True)
    manifest = []
    for e in entries:
        manifest.append(e)
        payload = root / e["path"]
        if not payload.exists():
            payload.write_text("country,year,value\nUSA,2020,1.0\n", encoding="utf-8")
    (root / MANIFEST_NAME).write_text(json.dumps(manifest), encoding="utf-8")


def entry_dict(index, name, kind="panel", path=None):
    return {
        "index": index,
        "name": name,
        "description": f"About {name}.",
        "kind": kind,
        "path": path or f"datasets/{index}.csv",
    }


def test_minimal_three_kind_catalog(tmp_path):
    write_minimal(
        tmp_path,
        [
            entry_dict(1, "Letters", kind="textual"),
            entry_dict(2, "Numbers", kind="panel"),
            entry_dict(3, "Flags", kind="cross_sectional"),
        ],
    )
    reg = load_registry(tmp_path)
    assert len(reg) == 3
    assert [e.index for e in reg] == [1, 2, 3]
    assert reg.entry(3).kind is DatasetKind.CROSS_SECTIONAL
    assert reg.entry(3).year == 2025


def test_full_catalog_loads(bank):
    assert len(bank) == 22
    kinds = [e.kind for e in bank]
    assert kinds[:4] == [DatasetKind.TEXTUAL] * 4
    assert kinds[18:] == [DatasetKind.CROSS_SECTIONAL] * 4
    assert bank.entry(1).name == "National communications"
    assert bank.entry(22).name == "Annex I country"


def test_noncontiguous_indices_rejected(tmp_path):
    write_minimal(tmp_path, [entry_dict(1, "A"), entry_dict(3, "B")])
    with pytest.raises(RegistryError, match="contiguous"):
        load_registry(tmp_path)


def test_duplicate_names_rejected(tmp_path):
    write_minimal(tmp_path, [entry_dict(1, "Same"), entry_dict(2, "Same")])
    with pytest.raises(RegistryError, match="duplicate"):
        load_registry(tmp_path)


def test_missing_payload_rejected(tmp_path):
    write_minimal(tmp_path, [entry_dict(1, "A")])
    (tmp_path / "datasets" / "1.csv").unlink()
    with pytest.raises(RegistryError, match="missing file"):
        load_registry(tmp_path)


def test_unknown_kind_rejected(tmp_path):
    write_minimal(tmp_path, [entry_dict(1, "A", kind="weekly")])
    with pytest.raises(RegistryError, match="unknown kind"):
        load_registry(tmp_path)


def test_metadata_block_layout(bank):
    block = metadata_block(bank)
    lines = block.splitlines()
    assert lines[0] == "Textual data:"
    assert lines[1].startswith("1. National communications: National communications submitted")
    assert "Panel data:" in lines
    assert "Cross-sectional data:" in lines
    # one kind header plus one line per entry, no trailing blank
    assert len(lines) == 22 + 3
    assert lines[-1] == f"22. {bank.entry(22).name}: {bank.entry(22).description}"
    # headers appear in kind order
    assert lines.index("Textual data:") < lines.index("Panel data:") < lines.index(
        "Cross-sectional data:"
    )


def test_metadata_block_deterministic(bank):
    assert metadata_block(bank) == metadata_block(bank)


def test_snippet_caps_lines(bank):
    text = snippet(bank.entry(6), bank.root, 10)
    lines = text.splitlines()
    assert len(lines) == 10
    assert lines[0] == "country,year,value"
    assert snippet(bank.entry(6), bank.root, 0) == ""
    # shorter file than n: return what exists
    short = snippet(bank.entry(19), bank.root, 100)
    assert len(short.splitlines()) == 9  # header + 8 countries


def test_resolve_indices_happy_path(bank):
    entries = resolve_indices(bank, [1, 5, 16])
    assert [e.name for e in entries] == [
        "National communications",
        "Meeting attendance records",
        "Democracy index",
    ]


def test_resolve_indices_limits(bank):
    with pytest.raises(RegistryError, match="limit is 3"):
        resolve_indices(bank, [5, 6, 7, 8])
    with pytest.raises(RegistryError, match="textual"):
        resolve_indices(bank, [1, 2])
    with pytest.raises(RegistryError, match="no dataset with index"):
        resolve_indices(bank, [23])
    with pytest.raises(RegistryError, match="empty"):
        resolve_indices(bank, [])


def test_serialize_round_trip(bank, tmp_path):
    text = serialize_registry(bank)
    again = Registry(entries=bank.entries, root=tmp_path)
    assert serialize_registry(again) == text  # root does not leak into bytes
    # load back from a copy
    (tmp_path / "datasets").mkdir()
    for e in bank.entries:
        target = tmp_path / e.path
        target.write_bytes(e.resolve_path(bank.root).read_bytes())
    save_registry(again)
    reloaded = load_registry(tmp_path)
    assert reloaded.entries == bank.entries


def test_validate_payloads_clean(bank):
    report = validate_payloads(bank)
    assert report.all_ok
    assert len(report.checks) == 22
    assert report.failures() == []


def test_validate_payloads_flags_bad_panel(tmp_path):
    write_minimal(tmp_path, [entry_dict(1, "NoYear")])
    (tmp_path / "datasets" / "1.csv").write_text("country,value\nUSA,1\n", encoding="utf-8")
    report = validate_payloads(load_registry(tmp_path))
    assert not report.all_ok
    assert "year" in report.failures()[0].issues[0]


def test_validate_payloads_duplicate_country(tmp_path):
    entry = entry_dict(1, "Flags", kind="cross_sectional")
    write_minimal(tmp_path, [entry])
    (tmp_path / "datasets" / "1.csv").write_text(
        "country,value\nUSA,1\nUSA,0\n", encoding="utf-8"
    )
    report = validate_payloads(load_registry(tmp_path))
    assert not report.all_ok


def test_entry_lookup_error(bank):
    with pytest.raises(RegistryError, match="no dataset with index 99"):
        bank.entry(99)
