"""Shared scripted judges and small builders used across test modules."""

from __future__ import annotations

import re

from ideaforge.arena import CRITERIA

VARIANT = re.compile(r"variant (\d+)")


def vote_text(code: int, explanation: str = "Assessment follows.") -> str:
    vote = {c: code for c in CRITERIA}
    return f"{explanation}\n{vote}"


def _sections(prompt: str) -> tuple[str, str]:
    one = prompt.index("Idea 1:\n")
    two = prompt.index("Idea 2:\n")
    return prompt[one:two], prompt[two:]


class OracleJudge:
    """Votes for the idea whose research question has the smaller variant number."""

    def complete(self, request) -> str:
        first, second = _sections(request.messages[-1].content)
        v1 = int(VARIANT.search(first).group(1))
        v2 = int(VARIANT.search(second).group(1))
        return vote_text(1 if v1 < v2 else 2)


class FirstPositionJudge:
    """Position-biased: always prefers whichever idea is presented first."""

    def complete(self, request) -> str:
        return vote_text(1)


class TieJudge:
    def complete(self, request) -> str:
        return vote_text(0)


def variant_of(idea) -> int:
    return int(VARIANT.search(idea.research_question).group(1))
