from app.schema import AggregateResult, AggregationRule, RatingMultiset


def majority_label(ratings: RatingMultiset) -> AggregateResult:
    """Level with the most ratings; ties go to the lowest level."""
    ratings.require_ratings()
    top = max(ratings.counts)
    winners = [level for level, count in enumerate(ratings.counts, start=1) if count == top]
    return AggregateResult(
        rule=AggregationRule.MAJORITY,
        label=winners[0],
        n=ratings.n,
        tie=len(winners) > 1,
    )


def average_score(ratings: RatingMultiset) -> AggregateResult:
    """Arithmetic mean of the ratings."""
    ratings.require_ratings()
    total = sum(level * count for level, count in enumerate(ratings.counts, start=1))
    return AggregateResult(
        rule=AggregationRule.AVERAGE,
        score=total / ratings.n,
        n=ratings.n,
    )


def aggregate(ratings: RatingMultiset, rule: AggregationRule) -> AggregateResult:
    if AggregationRule(rule) == AggregationRule.MAJORITY:
        return majority_label(ratings)
    return average_score(ratings)
