import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.exceptions import DegenerateMajority, InvalidInputs
from app.inference import infer_min_ratings
from app.logger import logger
from app.schema import AggregationRule, BucketFraction, DistributionStats, ItemHistory


def item_min_ratings(
    histories: Dict[str, ItemHistory],
    m: int,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
    min_history: int = 0,
) -> tuple:
    """Full-history n' per item, plus the items skipped for a tied maximum."""
    n_primes: Dict[str, int] = {}
    skipped: List[str] = []
    for item_id, history in histories.items():
        if len(history) < max(min_history, 1):
            continue
        try:
            n_primes[item_id] = infer_min_ratings(
                history.counts(m), rule, delta, target_error
            ).n_prime
        except DegenerateMajority:
            skipped.append(item_id)
    return n_primes, skipped


def bucket_fractions(values: Sequence[int], edges: Sequence[int]) -> List[BucketFraction]:
    """Fractions of values in [0, e1], (e1, e2], ..., (ek, inf)."""
    values = np.asarray(values)
    total = len(values)
    buckets = []
    lower = 0
    for upper in list(edges) + [None]:
        if upper is None:
            inside = values > lower
        elif lower == 0:
            inside = values <= upper
        else:
            inside = (values > lower) & (values <= upper)
        count = int(np.count_nonzero(inside))
        buckets.append(
            BucketFraction(
                lower=lower,
                upper=upper,
                count=count,
                fraction=count / total if total else 0.0,
            )
        )
        lower = upper
    return buckets


def min_ratings_distribution(
    histories: Dict[str, ItemHistory],
    m: int,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
    thresholds: Sequence[int] = (),
    reference: Optional[int] = None,
    buckets: Sequence[int] = (),
    min_history: int = 0,
) -> DistributionStats:
    """Survival curve of per-item n' and the share of items with enough ratings.

    ``reference`` is the n' every item is held to when counting sufficiency;
    it defaults to the median per-item n' (rounded up).
    """
    thresholds = list(thresholds)
    if thresholds != sorted(thresholds):
        raise InvalidInputs(f"thresholds must be sorted ascending: {thresholds}")
    if list(buckets) != sorted(buckets):
        raise InvalidInputs(f"bucket edges must be sorted ascending: {list(buckets)}")
    rule = AggregationRule(rule)

    n_primes, skipped = item_min_ratings(histories, m, rule, delta, target_error, min_history)
    if not n_primes:
        raise InvalidInputs("no item has a finite minimum number of ratings")
    values = np.array(list(n_primes.values()))

    survival = [float(np.mean(values >= threshold)) for threshold in thresholds]
    if reference is None:
        reference = int(math.ceil(np.median(values)))
    n_satisfying = sum(1 for item_id in n_primes if len(histories[item_id]) >= reference)

    stats = DistributionStats(
        rule=rule,
        thresholds=thresholds,
        survival=survival,
        reference=reference,
        n_items=len(n_primes),
        n_satisfying=n_satisfying,
        f_satisfying=n_satisfying / len(n_primes),
        buckets=bucket_fractions(values, buckets),
        n_primes=n_primes,
        skipped=skipped,
    )
    logger.info(
        f"{rule.value} n' distribution over {stats.n_items} items: "
        f"reference {reference}, {stats.f_satisfying:.2%} satisfy it"
    )
    return stats


def survival_rows(stats: DistributionStats) -> List[tuple]:
    """Two-column rows (n, Pr[n' >= n]) for plotting."""
    return list(zip(stats.thresholds, stats.survival))
