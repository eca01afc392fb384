"""Property-based invariants across the statistics and pipeline plumbing."""

import math
import random

from hypothesis import assume, given, settings
from hypothesis import strategies as st

from ideaforge.arena import CriterionVote, aggregate, elo_update
from ideaforge.gateway import Stage, make_request, request_digest
from ideaforge.ideas import deserialize_idea, make_idea, serialize_idea
from ideaforge.metrics import krippendorff_alpha, pearson, win_rate_ztest
from ideaforge.validation import split_turn

# -- strategies ------------------------------------------------------------

codes = st.sampled_from(["A", "Tie", "B"])
cells = st.one_of(st.none(), codes)

matrices = st.lists(
    st.lists(cells, min_size=2, max_size=5),
    min_size=2,
    max_size=12,
).map(lambda rows: [row + [None] * (5 - len(row)) for row in rows])


def alpha_or_none(matrix):
    try:
        return krippendorff_alpha(matrix)
    except Exception:
        return None


@given(matrices, st.randoms(use_true_random=False))
def test_alpha_invariant_under_relabeling(matrix, rng):
    """Nominal agreement only cares about same-vs-different, not the labels."""
    labels = ["A", "Tie", "B"]
    shuffled = labels[:]
    rng.shuffle(shuffled)
    mapping = dict(zip(labels, shuffled))
    relabeled = [[None if c is None else mapping[c] for c in row] for row in matrix]
    a, b = alpha_or_none(matrix), alpha_or_none(relabeled)
    if a is None:
        assert b is None
    else:
        assert b is not None
        assert math.isclose(a, b, abs_tol=1e-12)


@given(matrices, st.integers(0, 10_000))
def test_alpha_invariant_under_row_and_coder_permutation(matrix, seed):
    rng = random.Random(seed)
    rows = matrix[:]
    rng.shuffle(rows)
    width = len(matrix[0])
    order = list(range(width))
    rng.shuffle(order)
    permuted = [[row[j] for j in order] for row in rows]
    a, b = alpha_or_none(matrix), alpha_or_none(permuted)
    if a is None:
        assert b is None
    else:
        assert math.isclose(a, b, abs_tol=1e-12)


@given(
    st.lists(
        st.floats(-1e6, 1e6, allow_nan=False, width=32), min_size=3, max_size=30
    ),
    st.floats(0.01, 100.0),
    st.floats(-1e3, 1e3),
)
def test_pearson_affine_invariance(xs, scale, shift):
    # the affine maps themselves can absorb tiny values into a constant
    # vector (2 * 1e-38 + 1 == 1.0), which has no defined correlation
    ys = [2.0 * v + 1.0 for v in xs]
    moved = [scale * v + shift for v in xs]
    assume(len(set(xs)) >= 2 and len(set(ys)) >= 2 and len(set(moved)) >= 2)
    base = pearson(xs, ys)
    rescaled = pearson(moved, ys)
    assert math.isclose(base, 1.0, abs_tol=1e-9)
    assert math.isclose(rescaled, base, abs_tol=1e-6)


@given(st.integers(0, 500), st.integers(0, 500))
def test_ztest_antisymmetric(a, b):
    if a + b == 0:
        return
    fwd = win_rate_ztest(a, b)
    rev = win_rate_ztest(b, a)
    assert math.isclose(fwd.z, -rev.z, abs_tol=1e-12)
    assert math.isclose(fwd.p, rev.p, abs_tol=1e-12)
    assert 0.0 <= fwd.p <= 1.0


vote_values = st.tuples(
    st.integers(0, 2), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)
)


@given(vote_values)
def test_aggregate_mirrors_under_swap(values):
    vote = CriterionVote(*values)
    mirrored = aggregate(vote.swapped())
    straight = aggregate(vote)
    flip = {"a_win": "b_win", "b_win": "a_win", "tie": "tie"}
    assert mirrored.value == flip[straight.value]


@given(
    st.floats(500, 2000),
    st.floats(500, 2000),
    st.sampled_from([0.0, 0.5, 1.0]),
)
def test_elo_zero_sum_and_bounded_step(ra, rb, outcome):
    na, nb = elo_update(ra, rb, outcome)
    assert math.isclose(na + nb, ra + rb, abs_tol=1e-9)
    assert abs(na - ra) <= 32.0


question_text = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1, max_size=80
).filter(lambda s: s.strip())


@settings(max_examples=50)
@given(question_text, question_text, st.lists(question_text, min_size=1, max_size=5))
def test_idea_serialization_round_trip(question, theory, hypotheses):
    idea = make_idea("topic-x", question, theory, hypotheses)
    again = deserialize_idea(serialize_idea(idea))
    assert again == idea


@given(st.text(max_size=400))
def test_split_turn_concat_identity(turn):
    segments = split_turn(turn)
    assert "".join(s for _, s in segments) == turn


@given(st.text(min_size=1, max_size=200), st.text(max_size=30))
def test_digest_ignores_tags(prompt, tag_value):
    plain = make_request(prompt, stage=Stage.VALIDATION)
    tagged = make_request(prompt, stage=Stage.VALIDATION, extra=tag_value)
    assert request_digest(plain) == request_digest(tagged)


@given(st.text(min_size=1, max_size=200))
def test_digest_tracks_content(prompt):
    base = make_request(prompt, stage=Stage.VALIDATION)
    changed = make_request(prompt + "!", stage=Stage.VALIDATION)
    assert request_digest(base) != request_digest(changed)
