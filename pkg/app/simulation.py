"""Seeded sampler for the rating model and Monte Carlo checks of every bound.

Trials are grouped in blocks of ``SimConfig.block_size``. Block ``b`` draws
from ``PCG64(SeedSequence(seed, spawn_key=(b,)))`` and outcomes are reduced
in block order, so results do not depend on how many workers run the blocks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from pydantic import BaseModel

from app import bounds
from app.exceptions import InvalidInputs
from app.logger import logger
from app.model import ground_truth, top_two, true_mean
from app.schema import (
    AggregationRule,
    BoundResult,
    ErrorInterval,
    FailureEstimate,
    GroundTruth,
    MisbehaviorKind,
    MisbehaviorProfile,
    RatingMultiset,
    SamplerKind,
    SimConfig,
)


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent generator for block (or item) ``index`` under ``seed``."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,)))
    )


def _honest_levels(
    rng: np.random.Generator, alpha: np.ndarray, shape: tuple, sampler: SamplerKind
) -> np.ndarray:
    """0-based levels drawn from honest users."""
    m = alpha.shape[0]
    if sampler == SamplerKind.MARGINAL:
        return rng.choice(m, size=shape, p=alpha)

    # per-user pmf rho ~ Dirichlet(alpha) from normalized gamma draws; the small
    # shapes make rho very sparse, which is a property of the model
    gammas = rng.standard_gamma(alpha, size=shape + (m,))
    totals = gammas.sum(axis=-1, keepdims=True)
    underflow = totals[..., 0] == 0
    rho = np.divide(gammas, totals, out=np.zeros_like(gammas), where=totals > 0)
    rho[underflow] = alpha
    cumulative = np.cumsum(rho, axis=-1)
    u = rng.random(shape + (1,))
    return np.minimum((u >= cumulative).sum(axis=-1), m - 1)


def draw_levels(config: SimConfig, rng: np.random.Generator, trials: int) -> np.ndarray:
    """A ``(trials, n)`` array of 0-based levels with misbehavior injected."""
    alpha = np.asarray(config.params.alpha, dtype=float)
    m = alpha.shape[0]
    shape = (trials, config.n)
    levels = _honest_levels(rng, alpha, shape, config.sampler)

    profile = config.profile
    if profile.kind == MisbehaviorKind.HONEST or profile.fraction == 0:
        return levels

    if config.exact_count:
        attackers = np.zeros(shape, dtype=bool)
        attackers[:, : math.floor(profile.fraction * config.n)] = True
    else:
        attackers = rng.random(shape) < profile.fraction

    if profile.kind == MisbehaviorKind.RANDOM:
        attack = rng.integers(0, m, size=shape)
    else:
        attack = np.full(shape, profile.target - 1)
    return np.where(attackers, attack, levels)


def count_levels(levels: np.ndarray, m: int) -> np.ndarray:
    """Per-row level counts of a ``(trials, n)`` array, shape ``(trials, m)``."""
    trials = levels.shape[0]
    offsets = levels + m * np.arange(trials)[:, None]
    return np.bincount(offsets.ravel(), minlength=trials * m).reshape(trials, m)


def _block_counts(config: SimConfig, block: int) -> np.ndarray:
    start = block * config.block_size
    size = min(config.block_size, config.trials - start)
    levels = draw_levels(config, substream(config.seed, block), size)
    return count_levels(levels, config.params.m)


def simulate_counts(config: SimConfig, workers: int = 1) -> np.ndarray:
    """Level counts of every trial, shape ``(trials, m)``."""
    n_blocks = math.ceil(config.trials / config.block_size)
    if workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(lambda b: _block_counts(config, b), range(n_blocks)))
    else:
        blocks = [_block_counts(config, b) for b in range(n_blocks)]
    logger.debug(
        f"Simulated {config.trials} trials of n={config.n} in {n_blocks} blocks"
    )
    return np.vstack(blocks)


def sample_ratings(config: SimConfig, rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """One ordered sequence of ``config.n`` ratings on the 1..m scale."""
    rng = rng if rng is not None else substream(config.seed, 0)
    return draw_levels(config, rng, 1)[0] + 1


def sample_rating_set(config: SimConfig) -> RatingMultiset:
    """Counts of one simulated rating set of size ``config.n``."""
    levels = draw_levels(config, substream(config.seed, 0), 1)
    counts = count_levels(levels, config.params.m)[0]
    return RatingMultiset(counts=tuple(int(c) for c in counts))


def majority_labels(counts: np.ndarray) -> np.ndarray:
    """Majority label per trial; argmax picks the lowest level on ties."""
    return np.argmax(counts, axis=1) + 1


def average_scores(counts: np.ndarray) -> np.ndarray:
    levels = np.arange(1, counts.shape[1] + 1)
    return counts @ levels / counts.sum(axis=1)


def estimate_failure_rate(
    config: SimConfig,
    rule: AggregationRule,
    truth: GroundTruth,
    attacker_win: bool = False,
    tolerance: Optional[float] = None,
    workers: int = 1,
) -> FailureEstimate:
    """Fraction of trials where the aggregate misses the truth.

    Under the majority rule a miss is a label other than ``truth.label``, or,
    with ``attacker_win``, other than the attacker's target. Under the average
    rule a miss is an error above ``tolerance``.
    """
    counts = simulate_counts(config, workers)
    if AggregationRule(rule) == AggregationRule.MAJORITY:
        expected = truth.label
        if attacker_win:
            if config.profile.kind != MisbehaviorKind.BIASED:
                raise InvalidInputs("attacker-win mode needs a biased profile")
            expected = config.profile.target
        failures = int(np.count_nonzero(majority_labels(counts) != expected))
    else:
        if tolerance is None:
            raise InvalidInputs("the average rule needs an error tolerance")
        errors = np.abs(average_scores(counts) - truth.mean)
        failures = int(np.count_nonzero(errors > tolerance))
    estimate = FailureEstimate(failures=failures, trials=config.trials)
    logger.info(
        f"Failure rate {estimate.rate:.4f} ± {estimate.std_err:.4f} over {config.trials} trials at n={config.n}"
    )
    return estimate


def estimate_abs_error_quantile(
    config: SimConfig, truth: GroundTruth, quantile: float, workers: int = 1
) -> float:
    """Empirical ``quantile`` of |average score - true mean| across trials."""
    if not 0 < quantile < 1:
        raise InvalidInputs(f"quantile must be in (0,1), got {quantile}")
    counts = simulate_counts(config, workers)
    errors = np.abs(average_scores(counts) - truth.mean)
    return float(np.quantile(errors, quantile))


class Verification(BaseModel):
    """Outcome of checking one bound against simulation."""

    check: str
    n: int
    observed: float
    limit: float
    passed: bool
    bound: Optional[BoundResult] = None
    interval: Optional[ErrorInterval] = None
    estimate: Optional[FailureEstimate] = None


def _slack(delta: float, trials: int) -> float:
    return 3 * math.sqrt(delta / trials)


def verify_bound(
    params,
    rule: AggregationRule,
    delta: float,
    profile: MisbehaviorProfile,
    target_error: Optional[float] = None,
    trials: int = 10_000,
    seed: int = 0,
    sampler: SamplerKind = SamplerKind.MARGINAL,
    exact_count: bool = False,
    block_size: int = 256,
    workers: int = 1,
    n: Optional[int] = None,
) -> Verification:
    """Simulate at the bound's n and test the direction the bound guarantees.

    Majority bounds pass when the failure rate is at most delta plus three
    standard errors; a biased profile above the win threshold is checked for
    an attacker win instead. Average bounds pass when the (1 - delta)-quantile
    of the absolute error lies inside the matching error interval.

    ``n`` replaces the bound-derived number of ratings, to check how the
    guarantee degrades below it.
    """
    rule = AggregationRule(rule)
    profile.check_scale(params.m)

    def sim(n: int) -> SimConfig:
        return SimConfig(
            params=params,
            profile=profile,
            n=n,
            trials=trials,
            seed=seed,
            sampler=sampler,
            exact_count=exact_count,
            block_size=block_size,
        )

    if rule == AggregationRule.MAJORITY:
        truth = ground_truth(params)
        attacker_win = profile.kind == MisbehaviorKind.BIASED and (
            profile.target == truth.label
            or profile.fraction > bounds.biased_win_threshold(params, profile.target)
        )
        if attacker_win:
            bound = bounds.biased_win_bound(params, delta, profile.fraction, profile.target)
        else:
            bound = bounds.bound_for_profile(params, rule, delta, profile)
        n = n or bound.n_prime
        estimate = estimate_failure_rate(
            sim(n), rule, truth, attacker_win=attacker_win, workers=workers
        )
        limit = delta + _slack(delta, trials)
        return Verification(
            check="attacker_win" if attacker_win else f"majority_{profile.kind.value}",
            n=n,
            observed=estimate.rate,
            limit=limit,
            passed=estimate.rate <= limit,
            bound=bound,
            estimate=estimate,
        )

    if target_error is None:
        raise InvalidInputs("the average rule needs an error target E_r")
    gamma = true_mean(params.alpha)
    epsilon = bounds.solve_epsilon(target_error, params.m, gamma)
    if profile.kind == MisbehaviorKind.RANDOM:
        interval = bounds.average_random_interval(params, epsilon, profile.fraction, delta)
    elif profile.kind == MisbehaviorKind.BIASED:
        interval = bounds.average_biased_interval(
            params, epsilon, profile.fraction, profile.target, delta
        )
    else:
        interval = bounds.average_random_interval(params, epsilon, 0.0, delta)
    index, _, runner_up = top_two(params.alpha)
    truth = GroundTruth(label=index + 1, mean=gamma, runner_up=runner_up)
    n = n or interval.min_ratings
    quantile = estimate_abs_error_quantile(sim(n), truth, 1 - delta, workers)
    return Verification(
        check=f"average_{profile.kind.value}",
        n=n,
        observed=quantile,
        limit=interval.upper,
        passed=interval.lower <= quantile <= interval.upper,
        interval=interval,
    )
