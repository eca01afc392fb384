"""Prompt templates for every model-facing stage.

Templates live as plain text files under ``data/templates/``; placeholders are
``{lowercase words}`` and nothing else, so literal JSON braces in the prompt
text (e.g. the verdict format example) pass through untouched.  Rendering is
byte-exact: tests snapshot rendered prompts against golden files.
"""

from __future__ import annotations

import re
from functools import lru_cache
from importlib import resources
from typing import Mapping

from .errors import TemplateError

TEMPLATE_NAMES = (
    "idea_generation",
    "pair_evaluation",
    "selection_with_validation",
    "feasibility",
    "hypothesis_validation",
    "summarization",
)

# Matches placeholder slots only: starts with a letter, lowercase words
# separated by single spaces. '{'Hypothesis 1': ...}' does not match.
PLACEHOLDER_RE = re.compile(r"\{([a-z][a-z ]*)\}")

METADATA_SECTION_HEADER = "Here are existing data related to this topic:"


def _data_dir():
    return resources.files("ideaforge").joinpath("data")


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Raw template text (no trailing newline). Unknown names raise TemplateError."""
    if name not in TEMPLATE_NAMES:
        raise TemplateError(f"unknown template {name!r}; known: {', '.join(TEMPLATE_NAMES)}")
    path = _data_dir().joinpath("templates", f"{name}.txt")
    return path.read_text(encoding="utf-8").rstrip("\n")


@lru_cache(maxsize=None)
def criteria_text() -> str:
    """Detailed evaluation-criteria block bound into both judging prompts."""
    return _data_dir().joinpath("criteria.txt").read_text(encoding="utf-8").rstrip("\n")


def placeholders(name: str) -> tuple[str, ...]:
    seen: list[str] = []
    for match in PLACEHOLDER_RE.finditer(load_template(name)):
        if match.group(1) not in seen:
            seen.append(match.group(1))
    return tuple(seen)


def render_template(name: str, vars: Mapping[str, str]) -> str:
    """Substitute every placeholder; any unbound slot is an error, extras are ignored."""
    template = load_template(name)
    missing = [slot for slot in placeholders(name) if slot not in vars]
    if missing:
        raise TemplateError(
            f"template {name!r}: unbound placeholders: {', '.join(sorted(missing))}"
        )

    def _sub(match: re.Match) -> str:
        value = vars[match.group(1)]
        if not isinstance(value, str):
            raise TemplateError(
                f"template {name!r}: binding {match.group(1)!r} is not a string"
            )
        return value

    return PLACEHOLDER_RE.sub(_sub, template)


def metadata_section(block: str | None) -> str:
    """Binding for the generation prompt's optional data listing.

    None means the no-metadata arm of the comparison: the section vanishes
    entirely, including its header and surrounding blank line.
    """
    if block is None:
        return ""
    if not block.strip():
        raise TemplateError("metadata block is empty; pass None to omit the section")
    return f"{METADATA_SECTION_HEADER}\n{block}\n\n"
