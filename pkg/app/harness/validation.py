"""Replay time-stamped histories and count how often aggregates are reliable.

For every item the true quality comes from the full history: the majority
label of the estimated alpha, or its mean. A prefix is tested once it holds
at least n' ratings and is reliable when its aggregate reflects that truth:
the same label, or a mean within E_r.
"""

from typing import Dict, Optional, Tuple

import numpy as np

from app.exceptions import DegenerateMajority, InvalidInputs
from app.inference import infer_alpha, infer_min_ratings, prefix_counts, prefix_min_ratings
from app.logger import logger
from app.model import top_two, true_mean
from app.schema import (
    AggregationRule,
    ItemHistory,
    ItemValidation,
    ValidationReport,
)


def _true_quality(alpha_hat, rule: AggregationRule) -> float:
    if rule == AggregationRule.MAJORITY:
        return float(top_two(alpha_hat)[0] + 1)
    return true_mean(alpha_hat)


def _reliable(
    cumulative: np.ndarray,
    rule: AggregationRule,
    truth: float,
    target_error: Optional[float],
) -> np.ndarray:
    """Whether each prefix aggregate reflects ``truth``."""
    if rule == AggregationRule.MAJORITY:
        # argmax takes the lowest level on ties, like majority_label
        return np.argmax(cumulative, axis=1) + 1 == truth
    lengths = cumulative.sum(axis=1)
    scores = cumulative @ np.arange(1, cumulative.shape[1] + 1) / lengths
    return np.abs(scores - truth) <= target_error


def _check_inputs(
    histories: Dict[str, ItemHistory], rule: AggregationRule, target_error: Optional[float]
) -> AggregationRule:
    if not histories:
        raise InvalidInputs("validation needs at least one item history")
    rule = AggregationRule(rule)
    if rule == AggregationRule.AVERAGE and target_error is None:
        raise InvalidInputs("the average rule needs an error target E_r")
    return rule


def _item_truth(
    history: ItemHistory,
    m: int,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float],
) -> Tuple[float, int]:
    """Full-history truth and n' of one item; raises DegenerateMajority."""
    full = history.counts(m)
    truth = _true_quality(infer_alpha(full).alpha_hat, rule)
    n_prime = infer_min_ratings(full, rule, delta, target_error).n_prime
    return truth, n_prime


def validate(
    histories: Dict[str, ItemHistory],
    m: int,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
    min_history: int = 0,
) -> ValidationReport:
    """Test every prefix at least as long as the item's full-history n'."""
    rule = _check_inputs(histories, rule, target_error)
    report = ValidationReport(rule=rule, delta=delta, target_error=target_error)

    for item_id, history in histories.items():
        if len(history) < max(min_history, 1):
            report.excluded.append(item_id)
            continue
        try:
            truth, n_prime = _item_truth(history, m, rule, delta, target_error)
        except DegenerateMajority as e:
            logger.warning(f"Skipping item {item_id}: {e.message}")
            report.skipped.append(item_id)
            continue

        tested = prefix_counts(history.ratings, m)[n_prime - 1 :]
        passed = int(np.count_nonzero(_reliable(tested, rule, truth, target_error)))
        item = ItemValidation(
            item_id=item_id,
            n_ratings=len(history),
            n_prime=n_prime,
            true_quality=truth,
            passed=passed,
            failed=len(tested) - passed,
        )
        report.per_item.append(item)
        report.n_test += len(tested)
        report.n_reliable += passed

    logger.info(
        f"Validated {len(report.per_item)} items ({rule.value}): "
        f"{report.n_reliable}/{report.n_test} reliable, {len(report.skipped)} skipped"
    )
    return report


def validate_online(
    histories: Dict[str, ItemHistory],
    m: int,
    rule: AggregationRule,
    delta: float,
    target_error: Optional[float] = None,
    min_history: int = 0,
) -> ValidationReport:
    """Test each prefix that meets the n' inferred from that prefix alone."""
    rule = _check_inputs(histories, rule, target_error)
    report = ValidationReport(rule=rule, delta=delta, target_error=target_error, online=True)

    for item_id, history in histories.items():
        if len(history) < max(min_history, 1):
            report.excluded.append(item_id)
            continue
        try:
            truth, _ = _item_truth(history, m, rule, delta, target_error)
        except DegenerateMajority as e:
            logger.warning(f"Skipping item {item_id}: {e.message}")
            report.skipped.append(item_id)
            continue

        cumulative = prefix_counts(history.ratings, m)
        inferred = prefix_min_ratings(cumulative, rule, delta, target_error)
        lengths = np.arange(1, len(history) + 1)
        qualifies = lengths >= inferred
        reliable = _reliable(cumulative, rule, truth, target_error)
        passed = int(np.count_nonzero(qualifies & reliable))
        tested = int(np.count_nonzero(qualifies))
        item = ItemValidation(
            item_id=item_id,
            n_ratings=len(history),
            true_quality=truth,
            passed=passed,
            failed=tested - passed,
            skipped_prefixes=int(np.count_nonzero(np.isinf(inferred))),
        )
        report.per_item.append(item)
        report.n_test += tested
        report.n_reliable += passed

    logger.info(
        f"Online validation of {len(report.per_item)} items ({rule.value}): "
        f"{report.n_reliable}/{report.n_test} reliable"
    )
    return report
