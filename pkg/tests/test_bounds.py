import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from app import bounds
from app.exceptions import (
    AboveThreshold,
    BelowThreshold,
    DegenerateMajority,
    InvalidDelta,
    InvalidEpsilon,
    InvalidFraction,
    InvalidInputs,
    OutOfScaleRating,
    SameAsTruth,
)
from app.schema import AggregationRule, DirichletParams, MisbehaviorProfile


GAMMA = 76 / 35


@pytest.mark.parametrize("delta, expected", [(0.3, 67), (0.2, 77), (0.1, 93)])
def test_majority_honest_table(table_params, delta, expected):
    assert bounds.majority_honest_bound(table_params, delta).n_prime == expected


def test_majority_honest_raw_value(table_params):
    result = bounds.majority_honest_bound(table_params, 0.2)
    assert result.raw == pytest.approx(12 * (25 / 35) / (21 / 35) ** 2 * math.log(25))
    assert result.inputs.rule == AggregationRule.MAJORITY
    assert result.inputs.m == 5


@pytest.mark.parametrize("f, expected", [(0.0, 77), (0.1, 88), (0.2, 102)])
def test_majority_random_table(table_params, f, expected):
    assert abs(bounds.majority_random_bound(table_params, 0.2, f).n_prime - expected) <= 1


def test_random_bound_reduces_to_honest(table_params):
    honest = bounds.majority_honest_bound(table_params, 0.2)
    assert bounds.majority_random_bound(table_params, 0.2, 0.0).raw == pytest.approx(honest.raw)


@pytest.mark.parametrize("target, expected", [(5, 0.407), (1, 0.375)])
def test_win_threshold_table(table_params, target, expected):
    assert round(bounds.biased_win_threshold(table_params, target), 3) == expected


@pytest.mark.parametrize("f_prime, expected", [(0.0, 77), (0.1, 93), (0.2, 182)])
def test_resist_table(table_params, f_prime, expected):
    result = bounds.biased_resist_bound(table_params, 0.2, f_prime, target=5)
    assert abs(result.n_prime - expected) <= 1


def test_resist_errors(table_params):
    with pytest.raises(AboveThreshold):
        bounds.biased_resist_bound(table_params, 0.2, 0.41, target=5)
    with pytest.raises(SameAsTruth):
        bounds.biased_resist_bound(table_params, 0.2, 0.1, target=2)
    with pytest.raises(OutOfScaleRating):
        bounds.biased_resist_bound(table_params, 0.2, 0.1, target=6)


def test_win_bound_above_threshold(table_params):
    result = bounds.biased_win_bound(table_params, 0.2, 0.5, target=5)
    assert result.raw == pytest.approx(804.5, abs=1.0)
    with pytest.raises(BelowThreshold):
        bounds.biased_win_bound(table_params, 0.2, 0.3, target=5)


def test_win_bound_for_true_label_needs_fewer_ratings(table_params):
    boosted = bounds.biased_win_bound(table_params, 0.2, 0.1, target=2)
    assert boosted.raw == pytest.approx(70.05, abs=0.05)
    assert boosted.n_prime < bounds.majority_honest_bound(table_params, 0.2).n_prime


def test_degenerate_alpha_has_no_majority_bound():
    params = DirichletParams(alpha=(0.4, 0.4, 0.2))
    with pytest.raises(DegenerateMajority):
        bounds.majority_honest_bound(params, 0.2)


@pytest.mark.parametrize("delta", [0.0, 1.0, -0.5, 1.5])
def test_invalid_delta(table_params, delta):
    with pytest.raises(InvalidDelta):
        bounds.majority_honest_bound(table_params, delta)


def test_invalid_fraction_and_epsilon(table_params):
    with pytest.raises(InvalidFraction):
        bounds.majority_random_bound(table_params, 0.2, 1.0)
    with pytest.raises(InvalidEpsilon):
        bounds.average_honest_bound(0.0, 5, 0.2)
    with pytest.raises(InvalidInputs):
        bounds.solve_epsilon(0.5, 5, 0.5)


def test_average_honest_closed_form():
    # 3 / eps**2 * ln(2m / delta) with 2m / delta = e**3
    result = bounds.average_honest_bound(1.0, 2, 4 / math.e**3)
    assert result.raw == pytest.approx(9.0)
    assert result.n_prime == 9


def test_solve_epsilon_inverts_guaranteed_error():
    epsilon = bounds.solve_epsilon(0.5, 5, GAMMA)
    assert epsilon == pytest.approx(0.1271944, abs=1e-6)
    assert bounds.guaranteed_error(epsilon, 5, GAMMA) == pytest.approx(0.5)


@given(
    st.floats(min_value=1e-6, max_value=10.0),
    st.integers(min_value=2, max_value=12),
    st.floats(min_value=0.0, max_value=1.0),
)
def test_solve_epsilon_round_trip(target_error, m, position):
    gamma = 1 + position * (m - 1)
    epsilon = bounds.solve_epsilon(target_error, m, gamma)
    assert epsilon > 0
    assert bounds.guaranteed_error(epsilon, m, gamma) == pytest.approx(target_error, rel=1e-9)


@pytest.mark.parametrize(
    "target_error, expected, tolerance",
    [(0.75, 366, 1), (0.5, 716, 0.02 * 716), (1.0, 221, 0.05 * 221)],
)
def test_average_error_table(table_params, target_error, expected, tolerance):
    result = bounds.average_error_bound(table_params, 0.2, target_error)
    assert abs(result.n_prime - expected) <= tolerance
    assert result.inputs.target_error == pytest.approx(target_error)


def test_rule_comparison(table_params):
    rows = bounds.compare_rules(table_params, [0.3, 0.25, 0.2, 0.15, 0.1], target_error=0.5)
    assert [row.majority for row in rows] == sorted(row.majority for row in rows)
    for row in rows:
        assert row.average >= 5 * row.majority
        assert row.ratio == pytest.approx(row.average / row.majority)
    assert rows[0].average == pytest.approx(642, rel=0.03)
    assert rows[-1].average == pytest.approx(843, rel=0.03)


def test_random_interval(table_params):
    interval = bounds.average_random_interval(table_params, 0.1, 0.2, delta=0.2)
    assert interval.upper == pytest.approx(0.45016, abs=1e-4)
    assert interval.lower == 0.0
    assert interval.confidence == pytest.approx(0.8)
    assert interval.min_ratings == math.ceil(300 * math.log(50))


def test_biased_interval_is_shifted_by_bias(table_params):
    interval = bounds.average_biased_interval(table_params, 0.05, 0.3, target=5)
    bias = abs(5 - GAMMA) * 0.3
    assert interval.lower < bias < interval.upper
    assert interval.upper - bias == pytest.approx(bias - interval.lower)
    assert interval.min_ratings is None


def test_intervals_reduce_to_honest_error(table_params):
    epsilon = bounds.solve_epsilon(0.5, 5, GAMMA)
    random = bounds.average_random_interval(table_params, epsilon, 0.0)
    biased = bounds.average_biased_interval(table_params, epsilon, 0.0, target=1)
    assert random.upper == pytest.approx(0.5)
    assert biased.upper == pytest.approx(0.5)
    assert random.lower == biased.lower == 0.0


@pytest.mark.parametrize("f, expected", [(0.1, 842), (0.2, 947), (0.3, 1099)])
def test_average_random_bound(table_params, f, expected):
    result = bounds.average_random_bound(table_params, 0.2, 0.5, f)
    assert result.n_prime == pytest.approx(expected, rel=0.03)


def test_average_misbehavior_bounds_reduce_to_honest(table_params):
    honest = bounds.average_error_bound(table_params, 0.2, 0.5)
    random = bounds.average_random_bound(table_params, 0.2, 0.5, 0.0)
    biased = bounds.average_biased_bound(table_params, 0.2, 0.5, 0.0, target=5)
    assert random.raw == pytest.approx(honest.raw)
    assert biased.raw == pytest.approx(honest.raw)


def test_average_biased_bound_grows_with_fraction(table_params):
    small = bounds.average_biased_bound(table_params, 0.2, 0.5, 0.02, target=5)
    large = bounds.average_biased_bound(table_params, 0.2, 0.5, 0.1, target=5)
    assert large.n_prime > small.n_prime
    with pytest.raises(InvalidInputs):
        bounds.average_biased_bound(table_params, 0.2, 0.5, 0.5, target=5)


@given(st.floats(min_value=0.01, max_value=0.98), st.floats(min_value=0.001, max_value=0.01))
def test_majority_bound_decreases_in_delta(delta, step):
    params = DirichletParams(alpha=(0.1, 0.6, 0.2, 0.1))
    looser = bounds.majority_honest_bound(params, delta + step)
    assert looser.raw < bounds.majority_honest_bound(params, delta).raw


@given(st.floats(min_value=0.0, max_value=0.9), st.floats(min_value=0.001, max_value=0.09))
def test_random_bound_increases_in_fraction(f, step):
    params = DirichletParams(alpha=(0.1, 0.6, 0.2, 0.1))
    more = bounds.majority_random_bound(params, 0.2, f + step)
    assert more.raw > bounds.majority_random_bound(params, 0.2, f).raw


def test_bound_for_profile_dispatch(table_params):
    resist = bounds.bound_for_profile(
        table_params, "majority", 0.2, MisbehaviorProfile.biased(0.1, 5)
    )
    assert resist.n_prime == 93
    average = bounds.bound_for_profile(
        table_params, "average", 0.2, MisbehaviorProfile.honest(), target_error=0.75
    )
    assert average.n_prime == 366
    with pytest.raises(InvalidInputs):
        bounds.bound_for_profile(table_params, "average", 0.2, MisbehaviorProfile.honest())


def test_sweeps(table_params):
    by_delta = bounds.sweep(table_params, "majority", "delta", [0.3, 0.2, 0.1])
    assert [point.n_prime for point in by_delta] == [67, 77, 93]

    biased = bounds.sweep(table_params, "majority", "biased", [0.0, 0.2, 0.5], target=5)
    assert biased[1].n_prime == 182
    assert biased[2].n_prime is None
    assert biased[2].error == "AboveThreshold"

    with pytest.raises(InvalidInputs):
        bounds.sweep(table_params, "majority", "biased", [0.1])


def test_sweep_reports_out_of_range_fractions_per_point(table_params):
    points = bounds.sweep(table_params, "majority", "random", [0.2, 1.0])
    assert abs(points[0].n_prime - 102) <= 1
    assert points[1].n_prime is None
    assert points[1].error == "InvalidFraction"

    biased = bounds.sweep(table_params, "majority", "biased", [1.5, 0.2], target=5)
    assert biased[0].error == "InvalidFraction"
    assert biased[1].n_prime == 182
