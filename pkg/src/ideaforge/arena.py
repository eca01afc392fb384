"""Pairwise judging and tournament selection.

A judge model compares two ideas on four criteria; aggregate outcomes drive a
Swiss tournament, per-criterion outcomes drive ELO ratings, and dual-order
judging cancels position bias for the reference-accuracy harness.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import VoteParseError
from .gateway import Provider, Stage, make_request
from .ideas import Idea, Topic, balanced_spans, parse_jsonish, render_for_judging
from .templates import criteria_text, render_template

CRITERIA = ("Significance", "Novelty", "Feasibility", "Expected Effectiveness")

_VOTE_FIELDS = {
    "Significance": "significance",
    "Novelty": "novelty",
    "Feasibility": "feasibility",
    "Expected Effectiveness": "expected_effectiveness",
}

DEFAULT_ROUNDS = 5
DEFAULT_TOP_K = 5
ELO_INITIAL = 1000.0
ELO_K_FACTOR = 32.0
ELO_PERMUTATIONS = 100
PARSE_ATTEMPTS = 3


class Order(enum.Enum):
    AB = "AB"
    BA = "BA"


class Outcome(enum.Enum):
    A_WIN = "a_win"
    B_WIN = "b_win"
    TIE = "tie"


@dataclass(frozen=True)
class CriterionVote:
    """Per-criterion verdicts relative to the canonical (a, b) pair:
    0 tie, 1 idea a better, 2 idea b better."""

    significance: int
    novelty: int
    feasibility: int
    expected_effectiveness: int
    explanation: str = ""

    def __post_init__(self):
        for name in _VOTE_FIELDS.values():
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value not in (0, 1, 2):
                raise ValueError(f"criterion {name} must be 0, 1, or 2; got {value!r}")

    def value(self, criterion: str) -> int:
        return getattr(self, _VOTE_FIELDS[criterion])

    def swapped(self) -> "CriterionVote":
        flip = {0: 0, 1: 2, 2: 1}
        return CriterionVote(
            significance=flip[self.significance],
            novelty=flip[self.novelty],
            feasibility=flip[self.feasibility],
            expected_effectiveness=flip[self.expected_effectiveness],
            explanation=self.explanation,
        )


def parse_vote(text: str) -> CriterionVote:
    """Vote from the last JSON-ish object in a judge response.

    Accepts strict JSON or a Python-style dict with single quotes; the object
    must carry all four criterion keys with integers in range.
    """
    for lo, hi in reversed(balanced_spans(text)):
        try:
            payload = parse_jsonish(text[lo:hi])
        except ValueError:
            continue
        if not isinstance(payload, dict):
            continue
        if not all(key in payload for key in CRITERIA):
            continue
        kwargs = {}
        for key in CRITERIA:
            value = payload[key]
            if isinstance(value, str) and value.isdigit():
                value = int(value)
            if not isinstance(value, int) or isinstance(value, bool) or value not in (0, 1, 2):
                raise VoteParseError(f"criterion {key!r} out of range: {payload[key]!r}")
            kwargs[_VOTE_FIELDS[key]] = value
        return CriterionVote(explanation=text[:lo].strip(), **kwargs)
    raise VoteParseError("no assessment object with all four criteria found in judge output")


def aggregate(vote: CriterionVote) -> Outcome:
    """Majority of criteria won; ties on a criterion count for neither side."""
    first = sum(1 for c in CRITERIA if vote.value(c) == 1)
    second = sum(1 for c in CRITERIA if vote.value(c) == 2)
    if first > second:
        return Outcome.A_WIN
    if second > first:
        return Outcome.B_WIN
    return Outcome.TIE


@dataclass(frozen=True)
class MatchRecord:
    idea_a: str
    idea_b: str
    order: Order
    vote: CriterionVote
    outcome: Outcome
    round: int | None = None
    with_validation: bool = False

    def to_dict(self) -> dict:
        return {
            "idea_a": self.idea_a,
            "idea_b": self.idea_b,
            "order": self.order.value,
            "vote": {key: self.vote.value(key) for key in CRITERIA},
            "explanation": self.vote.explanation,
            "outcome": self.outcome.value,
            "round": self.round,
            "with_validation": self.with_validation,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "MatchRecord":
        vote = CriterionVote(
            explanation=raw.get("explanation", ""),
            **{_VOTE_FIELDS[key]: raw["vote"][key] for key in CRITERIA},
        )
        return cls(
            idea_a=raw["idea_a"],
            idea_b=raw["idea_b"],
            order=Order(raw["order"]),
            vote=vote,
            outcome=Outcome(raw["outcome"]),
            round=raw.get("round"),
            with_validation=bool(raw.get("with_validation", False)),
        )


@dataclass
class JudgingContext:
    """Everything judge_pair needs besides the two ideas."""

    topic: Topic
    judge: Provider
    with_validation: bool = False
    summaries: Mapping[str, Sequence] = field(default_factory=dict)
    stage: Stage = Stage.SELECTION

    def rendered(self, idea: Idea) -> str:
        summary = self.summaries.get(idea.id) if self.with_validation else None
        return render_for_judging(idea, summary=summary)


def judge_pair(
    ctx: JudgingContext,
    a: Idea,
    b: Idea,
    order: Order = Order.AB,
    round: int | None = None,
) -> MatchRecord:
    """One judged comparison. The stored vote is canonical: positional answers
    from a BA presentation are remapped so 1 always means idea a."""
    first, second = (a, b) if order is Order.AB else (b, a)
    template = "selection_with_validation" if ctx.with_validation else "pair_evaluation"
    prompt = render_template(
        template,
        {
            "research topic": ctx.topic.name,
            "detailed content of the evaluation criteria": criteria_text(),
            "content of idea one": ctx.rendered(first),
            "content of idea two": ctx.rendered(second),
        },
    )
    request = make_request(
        prompt,
        stage=ctx.stage,
        pair=f"{a.id}|{b.id}",
        order=order.value,
        topic=ctx.topic.id,
    )
    last_error: VoteParseError | None = None
    for _ in range(PARSE_ATTEMPTS):
        response = ctx.judge.complete(request)
        try:
            positional = parse_vote(response)
        except VoteParseError as exc:
            last_error = exc
            continue
        vote = positional if order is Order.AB else positional.swapped()
        return MatchRecord(
            idea_a=a.id,
            idea_b=b.id,
            order=order,
            vote=vote,
            outcome=aggregate(vote),
            round=round,
            with_validation=ctx.with_validation,
        )
    raise VoteParseError(
        f"judge output unparseable after {PARSE_ATTEMPTS} attempts "
        f"(pair {a.id} vs {b.id}): {last_error}"
    )


@dataclass
class Standings:
    scores: dict[str, float]
    buchholz: dict[str, float]
    byes: dict[str, int]
    order: list[str]

    def to_dict(self) -> dict:
        return {
            "scores": self.scores,
            "buchholz": self.buchholz,
            "byes": self.byes,
            "order": self.order,
        }


@dataclass
class SelectionResult:
    top: list[Idea]
    standings: Standings
    matches: list[MatchRecord]


def swiss_select(
    ideas: Sequence[Idea],
    ctx: JudgingContext,
    rounds: int = DEFAULT_ROUNDS,
    k: int = DEFAULT_TOP_K,
    seed: int = 0,
) -> SelectionResult:
    """Swiss tournament over the ideas; returns the top-k with full standings.

    Round 1 pairs a seeded shuffle; later rounds pair adjacent entries of the
    (score desc, id asc) table, skipping prior opponents when the greedy scan
    allows. Odd fields give a bye (+1) to the lowest-scored idea that has had
    the fewest byes so far.
    """
    if len(ideas) < 2:
        raise ValueError("tournament needs at least 2 ideas")
    by_id = {idea.id: idea for idea in ideas}
    if len(by_id) != len(ideas):
        raise ValueError("duplicate idea ids")
    rng = random.Random(seed)

    scores: dict[str, float] = {i: 0.0 for i in by_id}
    byes: dict[str, int] = {i: 0 for i in by_id}
    played: dict[str, set[str]] = {i: set() for i in by_id}
    opponents: dict[str, list[str]] = {i: [] for i in by_id}
    matches: list[MatchRecord] = []

    for round_no in range(1, rounds + 1):
        if round_no == 1:
            table = list(by_id)
            rng.shuffle(table)
        else:
            table = sorted(by_id, key=lambda i: (-scores[i], i))

        if len(table) % 2 == 1:
            bye = min(reversed(table), key=lambda i: byes[i])
            table = [i for i in table if i != bye]
            byes[bye] += 1
            scores[bye] += 1.0

        pending = list(table)
        while pending:
            first = pending.pop(0)
            pick = 0
            for pos, candidate in enumerate(pending):
                if candidate not in played[first]:
                    pick = pos
                    break
            second = pending.pop(pick)
            presentation = Order.AB if rng.random() < 0.5 else Order.BA
            record = judge_pair(ctx, by_id[first], by_id[second], presentation, round=round_no)
            matches.append(record)
            played[first].add(second)
            played[second].add(first)
            opponents[first].append(second)
            opponents[second].append(first)
            if record.outcome is Outcome.A_WIN:
                scores[first] += 1.0
            elif record.outcome is Outcome.B_WIN:
                scores[second] += 1.0
            else:
                scores[first] += 0.5
                scores[second] += 0.5

    buchholz = {
        i: sum(scores[o] for o in opponents[i]) for i in by_id
    }
    final_order = sorted(by_id, key=lambda i: (-scores[i], -buchholz[i], i))
    standings = Standings(scores=scores, buchholz=buchholz, byes=byes, order=final_order)
    top = [by_id[i] for i in final_order[:k]]
    return SelectionResult(top=top, standings=standings, matches=matches)


def elo_update(r_a: float, r_b: float, s_a: float, k_factor: float = ELO_K_FACTOR):
    """One standard ELO step; the symmetric delta keeps the rating sum exact."""
    e_a = 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))
    delta = k_factor * (s_a - e_a)
    return r_a + delta, r_b - delta


@dataclass(frozen=True)
class RatingTable:
    criteria: dict
    average: dict

    def to_dict(self) -> dict:
        return {"criteria": self.criteria, "average": self.average}


def elo_ratings(
    matches: Sequence[MatchRecord],
    ideas: Iterable[str] | None = None,
    initial: float = ELO_INITIAL,
    k_factor: float = ELO_K_FACTOR,
    permutations: int = ELO_PERMUTATIONS,
    seed: int = 0,
) -> RatingTable:
    """Per-criterion ELO ratings averaged over seeded match-order permutations.

    Match order matters to ELO, so each criterion's ratings are computed for
    `permutations` shuffles of the match list and averaged.
    """
    if not matches:
        raise ValueError("no matches to rate")
    ids = list(dict.fromkeys(
        i for m in matches for i in (m.idea_a, m.idea_b)
    ))
    if ideas is not None:
        known = list(ideas)
        unknown = [i for i in ids if i not in set(known)]
        if unknown:
            raise ValueError(f"matches reference unknown ideas: {', '.join(unknown)}")
        ids = known
    index = {idea_id: pos for pos, idea_id in enumerate(ids)}
    n_ideas = len(ids)
    n_matches = len(matches)

    a_idx = np.array([index[m.idea_a] for m in matches], dtype=np.intp)
    b_idx = np.array([index[m.idea_b] for m in matches], dtype=np.intp)
    score_map = {0: 0.5, 1: 1.0, 2: 0.0}

    rng = np.random.default_rng(seed)
    perms = np.stack([rng.permutation(n_matches) for _ in range(permutations)])
    rows = np.arange(permutations)

    criteria_ratings: dict[str, dict[str, float]] = {}
    for criterion in CRITERIA:
        s_for_a = np.array([score_map[m.vote.value(criterion)] for m in matches])
        ratings = np.full((permutations, n_ideas), float(initial))
        for step in range(n_matches):
            mi = perms[:, step]
            ai = a_idx[mi]
            bi = b_idx[mi]
            r_a = ratings[rows, ai]
            r_b = ratings[rows, bi]
            expected = 1.0 / (1.0 + 10.0 ** ((r_b - r_a) / 400.0))
            delta = k_factor * (s_for_a[mi] - expected)
            ratings[rows, ai] = r_a + delta
            ratings[rows, bi] = r_b - delta
        mean = ratings.mean(axis=0)
        criteria_ratings[criterion] = {idea_id: float(mean[index[idea_id]]) for idea_id in ids}

    average = {
        idea_id: sum(criteria_ratings[c][idea_id] for c in CRITERIA) / len(CRITERIA)
        for idea_id in ids
    }
    return RatingTable(criteria=criteria_ratings, average=average)


_SCORE_FOR_A = {Outcome.A_WIN: 1.0, Outcome.TIE: 0.5, Outcome.B_WIN: 0.0}


def debiased_compare(ctx: JudgingContext, a: Idea, b: Idea) -> float:
    """Score for idea a in [0, 1], averaged over both presentation orders."""
    forward = judge_pair(ctx, a, b, Order.AB)
    reverse = judge_pair(ctx, a, b, Order.BA)
    return (_SCORE_FOR_A[forward.outcome] + _SCORE_FOR_A[reverse.outcome]) / 2.0


@dataclass(frozen=True)
class AccuracyReport:
    per_criterion: dict
    average: float
    pairs: int

    def to_dict(self) -> dict:
        return {
            "per_criterion": self.per_criterion,
            "average": self.average,
            "pairs": self.pairs,
        }


def reference_accuracy(
    ground_truth: Sequence[Idea],
    generated: Mapping[str, Sequence[Idea]],
    ctx_for_topic,
) -> AccuracyReport:
    """How often judges rank ground-truth ideas above generated peers.

    Every (ground truth, generated) pair under a topic is judged in both
    orders; each criterion's two positional outcomes are averaged (debiasing
    at criterion level), then averaged over all pairs.

    ctx_for_topic: callable topic_id -> JudgingContext.
    """
    per_criterion_scores: dict[str, list[float]] = {c: [] for c in CRITERIA}
    pairs = 0
    for gt in ground_truth:
        peers = generated.get(gt.topic_id)
        if not peers:
            raise ValueError(f"no generated peers for topic {gt.topic_id!r}")
        ctx = ctx_for_topic(gt.topic_id)
        for peer in peers:
            forward = judge_pair(ctx, gt, peer, Order.AB)
            reverse = judge_pair(ctx, gt, peer, Order.BA)
            pairs += 1
            for criterion in CRITERIA:
                score = (
                    _criterion_score_for_a(forward.vote.value(criterion))
                    + _criterion_score_for_a(reverse.vote.value(criterion))
                ) / 2.0
                per_criterion_scores[criterion].append(score)
    per_criterion = {
        c: sum(scores) / len(scores) for c, scores in per_criterion_scores.items()
    }
    average = sum(per_criterion.values()) / len(CRITERIA)
    return AccuracyReport(per_criterion=per_criterion, average=average, pairs=pairs)


def _criterion_score_for_a(value: int) -> float:
    return {0: 0.5, 1: 1.0, 2: 0.0}[value]
