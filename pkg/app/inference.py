"""Parameter inference from observed ratings and online minimum-rating inference."""

import math
from typing import Optional, Sequence, Union

import numpy as np

from app import bounds
from app.config import config
from app.exceptions import DegenerateMajority, EmptyInput, InvalidInputs
from app.model import top_two, true_mean
from app.schema import (
    AggregationRule,
    BoundRequest,
    BoundResult,
    InferredParams,
    RatingMultiset,
)


def infer_alpha(ratings: RatingMultiset) -> InferredParams:
    """Maximum-likelihood alpha: the empirical level frequencies."""
    if ratings.n == 0:
        raise EmptyInput("cannot infer alpha from zero ratings")
    n = ratings.n
    return InferredParams(
        alpha_hat=tuple(count / n for count in ratings.counts),
        counts=ratings.counts,
        n=n,
    )


def infer_min_ratings(
    history: Union[RatingMultiset, Sequence[int]],
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
    m: Optional[int] = None,
) -> BoundResult:
    """Minimum number of ratings implied by the ratings seen so far.

    ``history`` is either a multiset or the ordered ratings up to time t; a
    plain sequence needs ``m``. Zero estimates are kept as they are, so an
    all-identical history yields a runner-up of exactly 0.
    """
    if not isinstance(history, RatingMultiset):
        if m is None:
            raise InvalidInputs("a raw rating history needs the scale size m")
        history = RatingMultiset.from_ratings(history, m)
    inferred = infer_alpha(history)
    rule = AggregationRule(rule)
    bounds.check_delta(delta)
    m = inferred.m

    if rule == AggregationRule.MAJORITY:
        _, top, runner_up = top_two(inferred.alpha_hat)
        if top - runner_up <= config.bounds.degenerate_gap:
            raise DegenerateMajority(
                f"inferred alpha has a tied maximum {top!r} after {inferred.n} ratings"
            )
        raw = 12 * top / (top - runner_up) ** 2 * math.log(m / delta)
        request = BoundRequest(
            rule=rule, alpha=inferred.alpha_hat, m=m, delta=delta
        )
    else:
        if target_error is None:
            raise InvalidInputs("the average rule needs an error target E_r")
        gamma_hat = true_mean(inferred.alpha_hat)
        epsilon = bounds.solve_epsilon(target_error, m, gamma_hat)
        raw = 3 / epsilon**2 * math.log(2 * m / delta)
        request = BoundRequest(
            rule=rule,
            alpha=inferred.alpha_hat,
            m=m,
            delta=delta,
            target_error=target_error,
            epsilon=epsilon,
        )
    return BoundResult(raw=raw, inputs=request)


def prefix_counts(ratings: Sequence[int], m: int) -> np.ndarray:
    """Cumulative level counts after each rating, shape ``(len(ratings), m)``."""
    levels = np.asarray(ratings, dtype=np.int64) - 1
    return np.cumsum(np.eye(m, dtype=np.int64)[levels], axis=0)


def prefix_min_ratings(
    cumulative: np.ndarray,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
) -> np.ndarray:
    """Inferred n' after every prefix of one item's history.

    Row ``j`` of ``cumulative`` holds the counts of the first ``j + 1``
    ratings. Prefixes whose majority estimate has a tied maximum get
    ``inf``, so no prefix length ever reaches them.
    """
    bounds.check_delta(delta)
    lengths = cumulative.sum(axis=1)
    m = cumulative.shape[1]
    alpha_hat = cumulative / lengths[:, None]

    if AggregationRule(rule) == AggregationRule.MAJORITY:
        ordered = np.sort(alpha_hat, axis=1)
        top, runner_up = ordered[:, -1], ordered[:, -2]
        gap = top - runner_up
        degenerate = gap <= config.bounds.degenerate_gap
        safe_gap = np.where(degenerate, 1.0, gap)
        raw = 12 * top / safe_gap**2 * math.log(m / delta)
    else:
        if target_error is None:
            raise InvalidInputs("the average rule needs an error target E_r")
        gamma_hat = alpha_hat @ np.arange(1, m + 1)
        # same root as bounds.solve_epsilon, one prefix per row
        epsilon = 2 * target_error / (
            np.sqrt(m * gamma_hat) + np.sqrt(m * gamma_hat + 4 * m * target_error)
        )
        raw = 3 / epsilon**2 * math.log(2 * m / delta)
        degenerate = np.zeros(len(raw), dtype=bool)

    n_prime = np.maximum(1.0, np.floor(raw + 0.5))
    return np.where(degenerate, np.inf, n_prime)
