"""Synthetic fixtures for tests and demos.

`build_sample_bank` writes a full 22-entry catalog whose names and
descriptions match the production catalog, with small synthetic CSV payloads
(seeded, so byte-stable across runs). Nothing here is real data.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

from .databank import Registry, load_registry, save_registry
from .databank import DatasetEntry, DatasetKind
from .ideas import Idea, Topic, make_idea

COUNTRIES = ("BRA", "CHN", "DEU", "IND", "JPN", "SAU", "TUV", "USA")
YEARS = tuple(range(2018, 2023))

# (name, description, kind) in catalog order; indices are 1-based positions.
CATALOG = (
    (
        "National communications",
        "National communications submitted by countries every four years "
        "(Annex I Parties) or eight years (Non-Annex I Parties), outlining "
        "their efforts to address climate change.",
        DatasetKind.TEXTUAL,
    ),
    (
        "Highlevel statements",
        "Highlevel climate change conference speeches, covering the formal "
        "statements made by country-representatives at COPs (2010-2023).",
        DatasetKind.TEXTUAL,
    ),
    (
        "Earth negotiation bulletins",
        "Reports summarizing the negotiation process and main outputs of "
        "UNFCCC meetings, including both daily reports and summary reports "
        "(1995-2024).",
        DatasetKind.TEXTUAL,
    ),
    (
        "Business statements",
        "UNFCCC statements of business associations in the span of eight "
        "years (2007-2014).",
        DatasetKind.TEXTUAL,
    ),
    (
        "Meeting attendance records",
        "Attendee records from all UNFCCC COP meetings (1995-2023), "
        "including their delegation, job, gender, and so on.",
        DatasetKind.PANEL,
    ),
    (
        "GDP",
        "The sum of gross value added by all resident producers in the "
        "economy plus any product taxes and minus any subsidies not included "
        "in the value of the products (in US$).",
        DatasetKind.PANEL,
    ),
    (
        "GDP per capita",
        "Gross domestic product divided by midyear population (in US$).",
        DatasetKind.PANEL,
    ),
    (
        "Population",
        "The population of the country, which counts all residents "
        "regardless of legal status or citizenship.",
        DatasetKind.PANEL,
    ),
    (
        "Foreign direct investment",
        "Direct investment equity flows in the reporting economy, which is "
        "the sum of equity capital, reinvestment of earnings, and other "
        "capital (in US$).",
        DatasetKind.PANEL,
    ),
    (
        "Life expectancy at birth",
        "The number of years a newborn infant would live if prevailing "
        "patterns of mortality at the time of its birth were to stay the "
        "same throughout its life.",
        DatasetKind.PANEL,
    ),
    (
        "Gender parity index",
        "The ratio of girls to boys enrolled at primary and secondary levels "
        "in public and private schools.",
        DatasetKind.PANEL,
    ),
    (
        "CO2 emissions per capita",
        "Carbon dioxide (CO2) emissions excluding LULUCF per capita.",
        DatasetKind.PANEL,
    ),
    (
        "Forest area",
        "Land under natural or planted stands of trees of at least 5 meters "
        "in situ (sq. km).",
        DatasetKind.PANEL,
    ),
    (
        "Natural resources rent",
        "Rents from coal, oil and natural gas production (% of GDP).",
        DatasetKind.PANEL,
    ),
    (
        "Trade openness index",
        "Sum of exports and imports of goods and services, divided by gross "
        "domestic product, expressed as a percentage.",
        DatasetKind.PANEL,
    ),
    (
        "Democracy index",
        "The country's level of democracy, ranging from -10 to 10 (fully "
        "democratic).",
        DatasetKind.PANEL,
    ),
    (
        "World risk index",
        "Higher scores indicate higher vulnerability to climate change.",
        DatasetKind.PANEL,
    ),
    (
        "ND-GAIN vulnerability index",
        "Higher scores indicate higher vulnerability to climate change.",
        DatasetKind.PANEL,
    ),
    (
        "Member of AOSIS",
        "Whether the country is a member of the Alliance of Small Island "
        "States (AOSIS).",
        DatasetKind.CROSS_SECTIONAL,
    ),
    (
        "Member of OPEC",
        "Whether the country is a member of the Organization of the "
        "Petroleum Exporting Countries (OPEC).",
        DatasetKind.CROSS_SECTIONAL,
    ),
    (
        "Member of G20",
        "Whether the country is a member of G20.",
        DatasetKind.CROSS_SECTIONAL,
    ),
    (
        "Annex I country",
        "Whether the country is an Annex I country.",
        DatasetKind.CROSS_SECTIONAL,
    ),
)

_FLAGS = {
    "Member of AOSIS": {"TUV"},
    "Member of OPEC": {"SAU"},
    "Member of G20": {"BRA", "CHN", "DEU", "IND", "JPN", "SAU", "USA"},
    "Annex I country": {"DEU", "JPN", "USA"},
}


def _slug(name: str) -> str:
    return "".join(c if c.isalnum() else "_" for c in name.lower()).strip("_")


def _write_csv(path: Path, header: list[str], rows: list[list]):
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def build_sample_bank(root: str | Path, seed: int = 2025) -> Registry:
    """Write registry.json plus datasets/ under root and return the loaded Registry."""
    root = Path(root)
    data_dir = root / "datasets"
    data_dir.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    entries = []
    for pos, (name, description, kind) in enumerate(CATALOG, start=1):
        rel = f"datasets/{_slug(name)}.csv"
        path = root / rel
        if kind is DatasetKind.TEXTUAL:
            rows = [
                [c, y, f"Synthetic {name.lower()} excerpt for {c}, year {y}."]
                for c in COUNTRIES
                for y in YEARS[:2]
            ]
            _write_csv(path, ["country", "year", "text"], rows)
        elif name == "Meeting attendance records":
            jobs = ("delegate", "minister", "observer", "scientist")
            rows = [
                [c, y, f"delegation-{c}", rng.choice(jobs), rng.choice("FM")]
                for c in COUNTRIES
                for y in YEARS
            ]
            _write_csv(path, ["country", "year", "delegation", "job", "gender"], rows)
        elif kind is DatasetKind.PANEL:
            rows = [
                [c, y, round(rng.uniform(0.0, 100.0), 3)] for c in COUNTRIES for y in YEARS
            ]
            _write_csv(path, ["country", "year", "value"], rows)
        else:
            members = _FLAGS[name]
            rows = [[c, 1 if c in members else 0] for c in COUNTRIES]
            _write_csv(path, ["country", "value"], rows)
        entries.append(
            DatasetEntry(
                index=pos,
                name=name,
                description=description,
                kind=kind,
                path=rel,
                year=2025 if kind is DatasetKind.CROSS_SECTIONAL else None,
            )
        )

    save_registry(Registry(entries=tuple(entries), root=root))
    return load_registry(root)


def sample_topic(suffix: str = "attendance") -> Topic:
    return Topic(
        id=f"topic-{suffix}",
        name="Drivers of participation in climate negotiations",
        description="What shapes who shows up and how hard they push.",
    )


def synthetic_ideas(topic: Topic, n: int, seed: int = 0, with_metadata: bool = False) -> list[Idea]:
    """Deterministic pool of n distinct ideas for tournament and store tests."""
    rng = random.Random(seed)
    themes = (
        "delegation size",
        "ministerial attendance",
        "statement tone",
        "coalition alignment",
        "pledge ambition",
        "negotiation bloc cohesion",
    )
    ideas = []
    for k in range(n):
        theme = themes[k % len(themes)]
        question = f"Does {theme} track economic exposure to climate policy (variant {k})?"
        hypotheses = [
            f"Countries with higher trade openness show greater {theme}.",
            f"The association between GDP per capita and {theme} strengthens after 2015.",
        ]
        if rng.random() < 0.5:
            hypotheses.append(f"Annex I membership moderates the link between {theme} and ambition.")
        ideas.append(
            make_idea(
                topic_id=topic.id,
                research_question=question,
                theory=f"Exposure shapes incentives, and incentives surface as {theme}.",
                hypotheses=hypotheses,
                policy_implication=f"Target support where {theme} lags exposure.",
                with_metadata=with_metadata,
            )
        )
    return ideas
