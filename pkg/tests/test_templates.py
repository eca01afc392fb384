"""Template loading and slot filling."""

import pytest

from ideaforge.errors import TemplateError
from ideaforge.templates import (
    METADATA_SECTION_HEADER,
    TEMPLATE_NAMES,
    criteria_text,
    load_template,
    metadata_section,
    placeholders,
    render_template,
)

ANCHORS = {
    "idea_generation": "Here are existing data related to this topic:",
    "feasibility": "'Feasibility', 'Validation Plan', and 'Data Used'",
    "pair_evaluation": "0 means a tie, 1 means idea 1 is better",
    "selection_with_validation": "0 means a tie, 1 means idea 1 is better",
    "hypothesis_validation": "'Hypothesis 1': 'Supported'",
    "summarization": "'type' and 'summarization'",
}


def test_template_inventory():
    assert set(TEMPLATE_NAMES) == {
        "idea_generation",
        "pair_evaluation",
        "selection_with_validation",
        "feasibility",
        "hypothesis_validation",
        "summarization",
    }


def test_unknown_template():
    with pytest.raises(TemplateError):
        load_template("grant_proposal")


@pytest.mark.parametrize("name", TEMPLATE_NAMES)
def test_templates_load_and_carry_anchor(name):
    text = load_template(name)
    assert text
    assert not text.endswith("\n")
    if name == "idea_generation":
        # its anchor lives in the metadata section binding, not the template body
        assert "{metadata section}" in text
    else:
        assert ANCHORS[name] in text


def test_metadata_anchor_via_section():
    assert metadata_section("1. A: a.") == f"{METADATA_SECTION_HEADER}\n1. A: a.\n\n"
    assert ANCHORS["idea_generation"] == METADATA_SECTION_HEADER


def test_metadata_section_without_block():
    assert metadata_section(None) == ""
    with pytest.raises(TemplateError):
        metadata_section("")


def test_placeholders_listed_in_order():
    assert placeholders("feasibility") == (
        "content of the idea",
        "content of the metadata",
    )
    assert placeholders("summarization") == ("raw validation traces",)


def test_render_fills_every_slot():
    out = render_template(
        "feasibility",
        {"content of the idea": "IDEA", "content of the metadata": "META"},
    )
    assert "IDEA" in out and "META" in out
    assert "{content of the idea}" not in out


def test_render_missing_slot_fails():
    with pytest.raises(TemplateError, match="content of the metadata"):
        render_template("feasibility", {"content of the idea": "IDEA"})


def test_render_extra_bindings_ignored():
    out = render_template(
        "summarization", {"raw validation traces": "T", "unused": "x"}
    )
    assert "T" in out


def test_render_rejects_non_string_binding():
    with pytest.raises(TemplateError):
        render_template("summarization", {"raw validation traces": 42})


def test_literal_braces_survive_rendering():
    out = render_template(
        "hypothesis_validation",
        {"hypotheses within the idea": "H", "metadata of datasets selected": "M"},
    )
    # the answer-format example is literal output, not a slot
    assert "{'Hypothesis 1': 'Supported', ...}" in out


def test_criteria_text_structure():
    text = criteria_text()
    for heading in ("Significance", "Novelty", "Feasibility", "Expected Effectiveness"):
        assert heading in text
    assert not text.endswith("\n")


def test_evaluation_templates_differ_only_in_validation_wording():
    plain = load_template("pair_evaluation")
    with_val = load_template("selection_with_validation")
    assert plain != with_val
    assert "Preliminary Validation" in with_val
    assert "Preliminary Validation" not in plain
