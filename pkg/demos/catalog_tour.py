"""
Tour of the dataset catalog
===========================

Builds the bundled synthetic catalog in a scratch directory, then walks
through the pieces a feasibility check relies on: the numbered metadata
listing, index resolution with its selection limits, and the staged files
a validation sandbox would see.
"""

import csv
import tempfile
from pathlib import Path

from ideaforge.databank import metadata_block, resolve_indices
from ideaforge.testing import build_sample_bank
from ideaforge.validation import stage_datasets

root = Path(tempfile.mkdtemp(prefix="catalog-"))
bank = build_sample_bank(root / "bank")

# the numbered listing is what the model sees; indices are stable
print(metadata_block(bank))
print()

# picking data: at most three sources, at most one of them textual
entries = resolve_indices(bank, [5, 6])
for e in entries:
    print(f"picked {e.index}: {e.name} ({e.kind.value})")

try:
    resolve_indices(bank, [1, 2])
except Exception as exc:
    print("two textual sources:", exc)

try:
    resolve_indices(bank, [5, 6, 7, 8])
except Exception as exc:
    print("four sources:", exc)

# staging copies just the chosen files into a working directory
workdir = root / "work"
workdir.mkdir()
staged = stage_datasets(entries, bank.root, workdir)
print("staged:", staged)

with open(workdir / "gdp.csv") as f:
    rows = list(csv.DictReader(f))
print("gdp.csv:", len(rows), "rows, header", list(rows[0]))
