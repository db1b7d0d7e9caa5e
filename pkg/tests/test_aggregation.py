import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.aggregation import aggregate, average_score, majority_label
from app.exceptions import EmptyInput
from app.schema import AggregationRule, RatingMultiset


def test_majority_label():
    result = majority_label(RatingMultiset.from_ratings([2, 2, 5], m=5))
    assert result.label == 2
    assert result.tie is False
    assert result.n == 3


def test_majority_tie_goes_to_lowest_level():
    result = majority_label(RatingMultiset(counts=(0, 3, 0, 3, 1)))
    assert result.label == 2
    assert result.tie is True


def test_average_score():
    result = average_score(RatingMultiset.from_ratings([2, 2, 5], m=5))
    assert result.score == pytest.approx(3.0)
    assert result.label is None


def test_aggregate_dispatches_on_rule():
    ratings = RatingMultiset(counts=(1, 0, 3))
    assert aggregate(ratings, AggregationRule.MAJORITY).label == 3
    assert aggregate(ratings, "average").score == pytest.approx(2.5)


def test_empty_ratings_raise():
    with pytest.raises(EmptyInput):
        majority_label(RatingMultiset(counts=(0, 0, 0)))
    with pytest.raises(EmptyInput):
        average_score(RatingMultiset(counts=(0, 0, 0)))


@given(
    st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=60),
    st.randoms(use_true_random=False),
)
def test_aggregates_ignore_rating_order(ratings, random):
    shuffled = list(ratings)
    random.shuffle(shuffled)
    original = RatingMultiset.from_ratings(ratings, m=5)
    permuted = RatingMultiset.from_ratings(shuffled, m=5)
    assert majority_label(original) == majority_label(permuted)
    assert average_score(original).score == pytest.approx(average_score(permuted).score)


@given(st.lists(st.integers(min_value=1, max_value=4), min_size=1, max_size=40))
def test_average_within_observed_range(ratings):
    score = average_score(RatingMultiset.from_ratings(ratings, m=4)).score
    assert min(ratings) - 1e-12 <= score <= max(ratings) + 1e-12


@given(st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=60))
def test_strict_majority_always_wins(ratings):
    multiset = RatingMultiset.from_ratings(ratings, m=5)
    label = majority_label(multiset).label
    assert all(multiset.counts[label - 1] >= count for count in multiset.counts)
    for level, count in enumerate(multiset.counts, start=1):
        if 2 * count > multiset.n:
            assert label == level


@given(
    st.lists(st.integers(min_value=1, max_value=5), min_size=1, max_size=60),
    st.data(),
)
def test_one_changed_rating_moves_average_by_at_most_a_scale_step(ratings, data):
    index = data.draw(st.integers(min_value=0, max_value=len(ratings) - 1))
    changed = list(ratings)
    changed[index] = data.draw(st.integers(min_value=1, max_value=5))
    before = average_score(RatingMultiset.from_ratings(ratings, m=5)).score
    after = average_score(RatingMultiset.from_ratings(changed, m=5)).score
    assert abs(after - before) <= (5 - 1) / len(ratings) + 1e-12
