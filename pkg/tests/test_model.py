from fractions import Fraction

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from app.exceptions import (
    DegenerateMajority,
    EmptyInput,
    InvalidFraction,
    InvalidParams,
    OutOfScaleRating,
)
from app.model import ground_truth, marginal_pmf, top_two, true_mean
from app.schema import (
    DirichletParams,
    MisbehaviorKind,
    MisbehaviorProfile,
    RatingMultiset,
    RatingScale,
)


weights = st.lists(
    st.floats(min_value=0.01, max_value=10.0, allow_nan=False, allow_infinity=False),
    min_size=2,
    max_size=8,
)


def _normalized(values):
    total = sum(values)
    return [value / total for value in values]


def test_fractions_round_trip_exactly(table_params):
    assert table_params.m == 5
    assert table_params.alpha[1] == float(Fraction(25, 35))
    assert sum(table_params.alpha) == pytest.approx(1.0, abs=1e-15)


def test_near_simplex_input_is_renormalized():
    params = DirichletParams(alpha=(0.5 + 4e-7, 0.5))
    assert sum(params.alpha) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "alpha",
    [(0.5, 0.4), (0.0, 1.0), (-0.1, 1.1), (1.0,)],
)
def test_invalid_alpha_is_rejected(alpha):
    with pytest.raises(InvalidParams):
        DirichletParams(alpha=alpha)


def test_from_inferred_floors_zero_estimates():
    params = DirichletParams.from_inferred([0.0, 0.75, 0.25])
    assert all(value > 0 for value in params.alpha)
    assert params.alpha[0] == pytest.approx(1e-12)
    assert sum(params.alpha) == pytest.approx(1.0)


def test_rating_scale():
    scale = RatingScale(m=5)
    assert scale.levels == [1, 2, 3, 4, 5]
    assert scale.check_rating(5) == 5
    with pytest.raises(OutOfScaleRating) as e:
        scale.check_rating(7, line=4)
    assert e.value.value == 7
    assert e.value.line == 4
    with pytest.raises(InvalidParams):
        RatingScale(m=1)


def test_rating_multiset():
    ratings = RatingMultiset.from_ratings([2, 2, 5], m=5)
    assert ratings.counts == (0, 2, 0, 0, 1)
    assert ratings.n == 3
    with pytest.raises(EmptyInput):
        RatingMultiset(counts=(0, 0)).require_ratings()
    with pytest.raises(InvalidParams):
        RatingMultiset(counts=(1, -1))


def test_misbehavior_profiles():
    assert MisbehaviorProfile.honest().kind == MisbehaviorKind.HONEST
    assert MisbehaviorProfile.random(0.2).fraction == 0.2
    assert MisbehaviorProfile.biased(1.0, 5).target == 5
    with pytest.raises(InvalidFraction):
        MisbehaviorProfile.random(1.0)
    with pytest.raises(InvalidFraction):
        MisbehaviorProfile.biased(1.5, 5)
    with pytest.raises(InvalidParams):
        MisbehaviorProfile(kind=MisbehaviorKind.BIASED, fraction=0.1)
    with pytest.raises(OutOfScaleRating):
        MisbehaviorProfile.biased(0.1, 6).check_scale(5)


def test_ground_truth_of_table(table_params):
    truth = ground_truth(table_params)
    assert truth.label == 2
    assert truth.runner_up == pytest.approx(4 / 35)
    assert truth.mean == pytest.approx(76 / 35)
    assert marginal_pmf(table_params) == list(table_params.alpha)


def test_top_two_counts_multiplicity():
    assert top_two([0.4, 0.4, 0.2]) == (0, 0.4, 0.4)
    with pytest.raises(DegenerateMajority):
        ground_truth(DirichletParams(alpha=(0.4, 0.4, 0.2)))


def test_near_tie_is_degenerate_under_min_gap():
    params = DirichletParams(alpha=(0.5 + 1e-12, 0.5 - 1e-12))
    assert ground_truth(params).label == 1
    with pytest.raises(DegenerateMajority):
        ground_truth(params, min_gap=1e-9)


@given(weights, st.floats(min_value=0.1, max_value=10.0))
def test_label_invariant_under_rescaling(values, scale):
    ordered = sorted(values, reverse=True)
    assume(ordered[0] - ordered[1] > 1e-6 * sum(values))
    label = ground_truth(DirichletParams(alpha=_normalized(values))).label
    rescaled = ground_truth(DirichletParams(alpha=_normalized([v * scale for v in values])))
    assert rescaled.label == label == values.index(ordered[0]) + 1


@given(weights, st.randoms(use_true_random=False))
def test_label_is_permutation_equivariant(values, random):
    ordered = sorted(values, reverse=True)
    assume(ordered[0] - ordered[1] > 1e-6 * sum(values))
    order = list(range(len(values)))
    random.shuffle(order)
    label = ground_truth(DirichletParams(alpha=_normalized(values))).label
    permuted = ground_truth(DirichletParams(alpha=_normalized([values[k] for k in order])))
    assert order[permuted.label - 1] == label - 1


@given(weights)
def test_true_mean_within_scale(values):
    alpha = _normalized(values)
    assert 1 - 1e-9 <= true_mean(alpha) <= len(alpha) + 1e-9
