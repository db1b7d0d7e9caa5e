"""Ground-truth extractors for the Dirichlet collective rating model.

A user's pmf over levels is drawn from Dirichlet(alpha); integrating it out
leaves P[rating = k] = alpha_k, so every quantity the aggregation rules
converge to is a function of alpha alone.
"""

from typing import List, Tuple

from app.exceptions import DegenerateMajority
from app.schema import DirichletParams, GroundTruth


def marginal_pmf(params: DirichletParams) -> List[float]:
    """Probability of each level 1..m for a randomly chosen honest user."""
    return list(params.alpha)


def top_two(alpha) -> Tuple[int, float, float]:
    """Return (argmax index, largest value, second largest value).

    The second value counts multiplicity, so a tied maximum returns it twice.
    """
    order = sorted(range(len(alpha)), key=lambda k: (-alpha[k], k))
    return order[0], float(alpha[order[0]]), float(alpha[order[1]])


def true_mean(alpha) -> float:
    """Infinite-sample average rating, sum of k * alpha_k."""
    return float(sum(level * value for level, value in enumerate(alpha, start=1)))


def ground_truth(params: DirichletParams, min_gap: float = 0.0) -> GroundTruth:
    """Infinite-sample label, mean and runner-up of an item.

    Raises DegenerateMajority when the maximum is attained at two levels or
    the top two components are closer than ``min_gap``.
    """
    index, top, runner_up = top_two(params.alpha)
    if top - runner_up <= min_gap:
        raise DegenerateMajority(
            f"alpha maximum {top!r} is not unique (runner-up {runner_up!r})"
        )
    return GroundTruth(label=index + 1, mean=true_mean(params.alpha), runner_up=runner_up)
