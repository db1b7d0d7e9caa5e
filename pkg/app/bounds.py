"""Closed-form minimum-rating bounds for the majority and average scoring rules.

Majority bounds come from a multiplicative Chernoff argument and share the
form ``12 * mass / gap**2 * ln(m / delta)``; average bounds come from a
two-sided Chernoff bound on the empirical level frequencies and have the
form ``3 / eps**2 * ln(2m / delta)``. All logarithms are natural.
"""

import math
from typing import List, Literal, Optional, Sequence

from pydantic import BaseModel

from app.config import config
from app.exceptions import (
    AboveThreshold,
    BelowThreshold,
    DegenerateMajority,
    InvalidDelta,
    InvalidEpsilon,
    InvalidFraction,
    InvalidInputs,
    RatingBoundError,
    SameAsTruth,
)
from app.logger import logger
from app.model import ground_truth, true_mean
from app.schema import (
    AggregationRule,
    BoundRequest,
    BoundResult,
    DirichletParams,
    ErrorInterval,
    GroundTruth,
    MisbehaviorKind,
    MisbehaviorProfile,
)


def check_delta(delta: float) -> float:
    if not 0 < delta < 1:
        raise InvalidDelta(f"delta must be in (0,1), got {delta}")
    return delta


def check_epsilon(epsilon: float) -> float:
    if not epsilon > 0 or math.isinf(epsilon):
        raise InvalidEpsilon(f"epsilon must be a positive real, got {epsilon}")
    return epsilon


def _majority_truth(params: DirichletParams) -> GroundTruth:
    return ground_truth(params, min_gap=config.bounds.degenerate_gap)


def _majority_result(
    raw: float, params: DirichletParams, delta: float, profile: MisbehaviorProfile
) -> BoundResult:
    result = BoundResult(
        raw=raw,
        inputs=BoundRequest(
            rule=AggregationRule.MAJORITY,
            alpha=params.alpha,
            m=params.m,
            delta=delta,
            profile=profile,
        ),
    )
    logger.debug(f"majority {profile.kind.value} bound: raw={raw:.4f} n'={result.n_prime}")
    return result


def majority_honest_bound(params: DirichletParams, delta: float) -> BoundResult:
    """Ratings needed for the majority label to equal the true label w.p. 1 - delta."""
    check_delta(delta)
    truth = _majority_truth(params)
    top = params.alpha[truth.label - 1]
    raw = 12 * top / (top - truth.runner_up) ** 2 * math.log(params.m / delta)
    return _majority_result(raw, params, delta, MisbehaviorProfile.honest())


def majority_random_bound(params: DirichletParams, delta: float, f: float) -> BoundResult:
    """Honest bound when a fraction ``f`` of users rate uniformly at random."""
    check_delta(delta)
    if not 0 <= f < 1:
        raise InvalidFraction(f"random fraction must be in [0,1), got {f}")
    truth = _majority_truth(params)
    m = params.m
    top = params.alpha[truth.label - 1]
    numerator = 12 * (f / m + (1 - f) * top)
    denominator = (1 - f) ** 2 * (top - truth.runner_up) ** 2
    raw = numerator / denominator * math.log(m / delta)
    return _majority_result(raw, params, delta, MisbehaviorProfile.random(f))


def biased_win_threshold(params: DirichletParams, target: int) -> float:
    """Attacker fraction above which ``target`` wins the majority for large n."""
    MisbehaviorProfile.biased(0.0, target).check_scale(params.m)
    truth = _majority_truth(params)
    gap = params.alpha[truth.label - 1] - params.alpha[target - 1]
    return gap / (1 + gap)


def biased_win_bound(
    params: DirichletParams, delta: float, f_prime: float, target: int
) -> BoundResult:
    """Ratings after which attackers voting ``target`` control the majority label."""
    check_delta(delta)
    profile = MisbehaviorProfile.biased(f_prime, target).check_scale(params.m)
    truth = _majority_truth(params)
    m = params.m
    top = params.alpha[truth.label - 1]
    log_term = math.log(m / delta)
    if target == truth.label:
        numerator = 12 * (f_prime + (1 - f_prime) * top)
        margin = f_prime + (1 - f_prime) * (top - truth.runner_up)
    else:
        threshold = biased_win_threshold(params, target)
        if f_prime <= threshold:
            raise BelowThreshold(
                f"fraction {f_prime} does not exceed win threshold {threshold:.6f} for level {target}"
            )
        attacked = params.alpha[target - 1]
        numerator = 12 * (f_prime + (1 - f_prime) * attacked)
        margin = f_prime + (1 - f_prime) * (attacked - top)
    raw = numerator / margin**2 * log_term
    return _majority_result(raw, params, delta, profile)


def biased_resist_bound(
    params: DirichletParams, delta: float, f_prime: float, target: int
) -> BoundResult:
    """Ratings needed to recover the true label despite attackers voting ``target``."""
    check_delta(delta)
    profile = MisbehaviorProfile.biased(f_prime, target).check_scale(params.m)
    truth = _majority_truth(params)
    if target == truth.label:
        raise SameAsTruth(f"level {target} is the true label; nothing to resist")
    threshold = biased_win_threshold(params, target)
    if f_prime >= threshold:
        raise AboveThreshold(
            f"fraction {f_prime} reaches win threshold {threshold:.6f}; the true label cannot be recovered"
        )
    top = params.alpha[truth.label - 1]
    honest_top = (1 - f_prime) * top
    contender = max(
        f_prime + (1 - f_prime) * params.alpha[target - 1],
        (1 - f_prime) * truth.runner_up,
    )
    raw = 12 * honest_top * math.log(params.m / delta) / (honest_top - contender) ** 2
    return _majority_result(raw, params, delta, profile)


def guaranteed_error(epsilon: float, m: int, gamma: float) -> float:
    """Absolute error eps*sqrt(m*gamma) + m*eps**2 controlled by the average bound."""
    return epsilon * math.sqrt(m * gamma) + m * epsilon**2


def solve_epsilon(target_error: float, m: int, gamma: float) -> float:
    """Positive root of m*eps**2 + sqrt(m*gamma)*eps - E_r = 0."""
    if not target_error > 0 or m < 2 or not 1 <= gamma <= m:
        raise InvalidInputs(
            f"need E_r > 0, m >= 2 and 1 <= gamma <= m; got E_r={target_error}, m={m}, gamma={gamma}"
        )
    root = math.sqrt(m * gamma)
    # the rationalized form avoids cancellation when E_r is small
    return 2 * target_error / (root + math.sqrt(m * gamma + 4 * m * target_error))


def average_honest_bound(
    epsilon: float, m: int, delta: float, gamma: Optional[float] = None
) -> BoundResult:
    """Ratings after which every level frequency is within a factor eps of alpha."""
    check_epsilon(epsilon)
    check_delta(delta)
    if m < 2:
        raise InvalidInputs(f"rating scale needs m >= 2, got {m}")
    raw = 3 / epsilon**2 * math.log(2 * m / delta)
    target_error = guaranteed_error(epsilon, m, gamma) if gamma is not None else None
    result = BoundResult(
        raw=raw,
        inputs=BoundRequest(
            rule=AggregationRule.AVERAGE,
            m=m,
            delta=delta,
            epsilon=epsilon,
            target_error=target_error,
        ),
    )
    logger.debug(f"average bound: eps={epsilon:.6f} raw={raw:.4f} n'={result.n_prime}")
    return result


def average_error_bound(
    params: DirichletParams, delta: float, target_error: float
) -> BoundResult:
    """Average-rule n' for an absolute error target E_r on a known alpha."""
    gamma = true_mean(params.alpha)
    epsilon = solve_epsilon(target_error, params.m, gamma)
    result = average_honest_bound(epsilon, params.m, delta, gamma)
    return result.model_copy(
        update={"inputs": result.inputs.model_copy(update={"alpha": params.alpha})}
    )


def _interval(
    bias: float, width: float, epsilon: float, m: int, delta: Optional[float]
) -> ErrorInterval:
    confidence = None
    min_ratings = None
    if delta is not None:
        check_delta(delta)
        confidence = 1 - delta
        min_ratings = math.ceil(3 * math.log(2 * m / delta) / epsilon**2)
    return ErrorInterval(
        lower=max(0.0, bias - width),
        upper=bias + width,
        confidence=confidence,
        min_ratings=min_ratings,
    )


def average_random_interval(
    params: DirichletParams, epsilon: float, f: float, delta: Optional[float] = None
) -> ErrorInterval:
    """Range of |r_hat - gamma| when a fraction ``f`` rates uniformly at random."""
    check_epsilon(epsilon)
    if not 0 <= f < 1:
        raise InvalidFraction(f"random fraction must be in [0,1), got {f}")
    m = params.m
    gamma = true_mean(params.alpha)
    bias = abs(m / 2 - gamma) * f
    width = guaranteed_error(epsilon, m, gamma + m * f / 2 - gamma * f)
    return _interval(bias, width, epsilon, m, delta)


def average_biased_interval(
    params: DirichletParams,
    epsilon: float,
    f_prime: float,
    target: int,
    delta: Optional[float] = None,
) -> ErrorInterval:
    """Range of |r_hat - gamma| when a fraction ``f_prime`` always rates ``target``."""
    check_epsilon(epsilon)
    MisbehaviorProfile.biased(f_prime, target).check_scale(params.m)
    m = params.m
    gamma = true_mean(params.alpha)
    bias = abs(target - gamma) * f_prime
    width = guaranteed_error(epsilon, m, gamma + f_prime * target - gamma * f_prime)
    return _interval(bias, width, epsilon, m, delta)


def _average_misbehavior_bound(
    params: DirichletParams,
    delta: float,
    target_error: float,
    bias: float,
    shifted_gamma: float,
    profile: MisbehaviorProfile,
) -> BoundResult:
    check_delta(delta)
    if bias >= target_error:
        raise InvalidInputs(
            f"misbehavior bias {bias:.6f} already reaches E_r={target_error}; no number of ratings suffices"
        )
    m = params.m
    epsilon = solve_epsilon(target_error - bias, m, min(max(shifted_gamma, 1.0), m))
    raw = 3 / epsilon**2 * math.log(2 * m / delta)
    result = BoundResult(
        raw=raw,
        inputs=BoundRequest(
            rule=AggregationRule.AVERAGE,
            alpha=params.alpha,
            m=m,
            delta=delta,
            profile=profile,
            target_error=target_error,
            epsilon=epsilon,
        ),
    )
    logger.debug(f"average {profile.kind.value} bound: eps={epsilon:.6f} n'={result.n_prime}")
    return result


def average_random_bound(
    params: DirichletParams, delta: float, target_error: float, f: float
) -> BoundResult:
    """Average-rule n' whose random-misbehavior interval stays within E_r."""
    if not 0 <= f < 1:
        raise InvalidFraction(f"random fraction must be in [0,1), got {f}")
    m = params.m
    gamma = true_mean(params.alpha)
    return _average_misbehavior_bound(
        params,
        delta,
        target_error,
        bias=abs(m / 2 - gamma) * f,
        shifted_gamma=gamma + m * f / 2 - gamma * f,
        profile=MisbehaviorProfile.random(f),
    )


def average_biased_bound(
    params: DirichletParams, delta: float, target_error: float, f_prime: float, target: int
) -> BoundResult:
    """Average-rule n' whose biased-misbehavior interval stays within E_r."""
    profile = MisbehaviorProfile.biased(f_prime, target).check_scale(params.m)
    gamma = true_mean(params.alpha)
    return _average_misbehavior_bound(
        params,
        delta,
        target_error,
        bias=abs(target - gamma) * f_prime,
        shifted_gamma=gamma + f_prime * target - gamma * f_prime,
        profile=profile,
    )


def bound_for_profile(
    params: DirichletParams,
    rule: AggregationRule,
    delta: float,
    profile: MisbehaviorProfile,
    target_error: Optional[float] = None,
) -> BoundResult:
    """Pick the calculator matching a rule and misbehavior profile.

    Biased profiles resolve to the resist bound under the majority rule.
    """
    rule = AggregationRule(rule)
    if rule == AggregationRule.MAJORITY:
        if profile.kind == MisbehaviorKind.HONEST:
            return majority_honest_bound(params, delta)
        if profile.kind == MisbehaviorKind.RANDOM:
            return majority_random_bound(params, delta, profile.fraction)
        return biased_resist_bound(params, delta, profile.fraction, profile.target)

    if target_error is None:
        raise InvalidInputs("the average rule needs an error target E_r")
    if profile.kind == MisbehaviorKind.HONEST:
        return average_error_bound(params, delta, target_error)
    if profile.kind == MisbehaviorKind.RANDOM:
        return average_random_bound(params, delta, target_error, profile.fraction)
    return average_biased_bound(params, delta, target_error, profile.fraction, profile.target)


class SweepPoint(BaseModel):
    x: float
    raw: Optional[float] = None
    n_prime: Optional[int] = None
    error: Optional[str] = None


class RuleComparison(BaseModel):
    delta: float
    majority: Optional[int] = None
    average: Optional[int] = None
    ratio: Optional[float] = None


SweepVariable = Literal["delta", "random", "biased"]


def sweep(
    params: DirichletParams,
    rule: AggregationRule,
    variable: SweepVariable,
    values: Sequence[float],
    delta: float = 0.2,
    target_error: Optional[float] = None,
    target: Optional[int] = None,
) -> List[SweepPoint]:
    """Minimum ratings as one parameter varies.

    ``delta`` varies the failure probability of the honest bound; ``random``
    and ``biased`` vary the misbehaving fraction at a fixed ``delta``. Points
    where no bound exists carry the error name instead of a value.
    """
    if variable == "biased" and target is None:
        raise InvalidInputs("a biased sweep needs a target level")
    points = []
    for x in values:
        try:
            if variable == "delta":
                point_delta, profile = x, MisbehaviorProfile.honest()
            elif variable == "random":
                point_delta, profile = delta, MisbehaviorProfile.random(x)
            else:
                point_delta, profile = delta, MisbehaviorProfile.biased(x, target)
            result = bound_for_profile(params, rule, point_delta, profile, target_error)
            points.append(SweepPoint(x=x, raw=result.raw, n_prime=result.n_prime))
        except RatingBoundError as e:
            points.append(SweepPoint(x=x, error=type(e).__name__))
    logger.info(f"Swept {variable} over {len(points)} points for the {AggregationRule(rule).value} rule")
    return points


def compare_rules(
    params: DirichletParams,
    deltas: Sequence[float],
    target_error: float,
    profile: Optional[MisbehaviorProfile] = None,
) -> List[RuleComparison]:
    """Majority versus average n' at each delta under the same profile."""
    profile = profile or MisbehaviorProfile.honest()
    rows = []
    for delta in deltas:
        row = RuleComparison(delta=delta)
        try:
            row.majority = bound_for_profile(
                params, AggregationRule.MAJORITY, delta, profile
            ).n_prime
        except DegenerateMajority:
            raise
        except RatingBoundError as e:
            logger.warning(f"No majority bound at delta={delta}: {e.message}")
        try:
            row.average = bound_for_profile(
                params, AggregationRule.AVERAGE, delta, profile, target_error
            ).n_prime
        except RatingBoundError as e:
            logger.warning(f"No average bound at delta={delta}: {e.message}")
        if row.majority and row.average:
            row.ratio = row.average / row.majority
        rows.append(row)
    return rows
