"""
Swiss selection and ELO ratings with a known answer
===================================================

Sixteen synthetic ideas carry a hidden quality order in their research
questions. An oracle judge that always prefers the better one lets us watch
the tournament machinery recover the truth, and a position-biased judge
shows what the order-swapping comparison is for.
"""

import itertools
import re

from ideaforge.arena import (
    CRITERIA,
    JudgingContext,
    Order,
    debiased_compare,
    elo_ratings,
    judge_pair,
    swiss_select,
)
from ideaforge.testing import sample_topic, synthetic_ideas

VARIANT = re.compile(r"variant (\d+)")


def rank_of(text):
    return int(VARIANT.search(text).group(1))


class Oracle:
    """Always votes for the idea with the smaller hidden rank."""

    def complete(self, request):
        prompt = request.messages[-1].content
        first = prompt[prompt.index("Idea 1:") : prompt.index("Idea 2:")]
        second = prompt[prompt.index("Idea 2:") :]
        code = 1 if rank_of(first) < rank_of(second) else 2
        return "Judged on the hidden rank.\n%r" % ({c: code for c in CRITERIA},)


class FirstWins:
    def complete(self, request):
        return "The first one, always.\n%r" % ({c: 1 for c in CRITERIA},)


topic = sample_topic()
pool = synthetic_ideas(topic, 16)
truth = sorted(pool, key=lambda i: rank_of(i.research_question))
ctx = JudgingContext(topic=topic, judge=Oracle())

result = swiss_select(pool, ctx, rounds=5, k=5, seed=22)
print("swiss top 5: ", [rank_of(i.research_question) for i in result.top])
print("true top 5:  ", [rank_of(i.research_question) for i in truth[:5]])
print("matches played:", len(result.matches))

# a full round robin gives ELO enough evidence for the exact order
matches = [
    judge_pair(ctx, a, b, Order.AB) for a, b in itertools.combinations(truth, 2)
]
table = elo_ratings(matches)
by_rating = sorted(table.average, key=lambda i: -table.average[i])
print("elo recovers truth:", by_rating == [i.id for i in truth])
print("rating spread: %.1f to %.1f" % (
    table.average[by_rating[-1]], table.average[by_rating[0]]))

# position bias: a biased judge looks decisive in one order, but averaging
# both presentation orders lands on a coin flip
biased = JudgingContext(topic=topic, judge=FirstWins())
print("biased judge, both orders averaged:",
      debiased_compare(biased, pool[0], pool[1]))
