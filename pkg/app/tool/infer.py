from fractions import Fraction

from app.cli import Report, RunConfig, load_histories, load_multiset, single_rule
from app.exceptions import DegenerateMajority
from app.inference import infer_alpha, infer_min_ratings
from app.logger import logger
from app.schema import RatingMultiset
from app.tool import parameters as p
from app.tool.base import CommandTool


_SOURCES = {
    "ratings": p.RATINGS,
    "counts": p.COUNTS,
    "dataset": p.DATASET,
    "item": p.ITEM,
    "m": p.M,
}


def _per_item(run_config: RunConfig) -> bool:
    return run_config.dataset is not None and run_config.item is None


def _alpha_row(item_id, counts: RatingMultiset) -> dict:
    inferred = infer_alpha(counts)
    return {
        "item_id": item_id,
        "n": inferred.n,
        "alpha_hat": list(inferred.alpha_hat),
        "alpha_exact": [str(Fraction(c, inferred.n)) for c in inferred.counts],
    }


class InferAlphaTool(CommandTool):
    name: str = "infer-alpha"
    description: str = """Maximum-likelihood alpha of observed ratings: the level frequencies.
Given a dataset without --item, every item is estimated."""
    parameters: dict = p.schema(_SOURCES)

    def run(self, run_config: RunConfig) -> Report:
        if _per_item(run_config):
            histories = load_histories(run_config)
            rows = [
                _alpha_row(item_id, history.counts(run_config.m))
                for item_id, history in histories.items()
            ]
        else:
            rows = [_alpha_row(run_config.item, load_multiset(run_config))]
        result = rows if _per_item(run_config) else rows[0]
        return Report(run_config=run_config, result=result, rows=rows)


class InferMinTool(CommandTool):
    name: str = "infer-min"
    description: str = """Minimum number of ratings implied by the ratings observed so far.
Given a dataset without --item, every item is evaluated; items with a tied
majority are reported with an error."""
    parameters: dict = p.schema(
        {
            **_SOURCES,
            "rule": p.RULE,
            "delta": p.DELTA,
            "target_error": p.TARGET_ERROR,
        }
    )

    def run(self, run_config: RunConfig) -> Report:
        rule = single_rule(run_config)
        if not _per_item(run_config):
            result = infer_min_ratings(
                load_multiset(run_config), rule, run_config.delta, run_config.target_error
            )
            row = {
                "item_id": run_config.item,
                "raw": result.raw,
                "n_prime": result.n_prime,
            }
            return Report(run_config=run_config, result=result.model_dump(mode="json"), rows=[row])

        rows = []
        for item_id, history in load_histories(run_config).items():
            row = {"item_id": item_id, "n": len(history)}
            try:
                result = infer_min_ratings(
                    history.counts(run_config.m), rule, run_config.delta, run_config.target_error
                )
                row.update(
                    raw=result.raw,
                    n_prime=result.n_prime,
                    sufficient=len(history) >= result.n_prime,
                )
            except DegenerateMajority as e:
                logger.warning(f"Item {item_id}: {e.message}")
                row.update(error=type(e).__name__)
            rows.append(row)
        return Report(run_config=run_config, result=rows, rows=rows)
