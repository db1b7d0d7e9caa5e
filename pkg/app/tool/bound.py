from app import bounds
from app.cli import Report, RunConfig, load_params, require, single_rule
from app.model import ground_truth, true_mean
from app.schema import AggregationRule, MisbehaviorKind
from app.tool import parameters as p
from app.tool.base import CommandTool


DEFAULT_DELTAS = [0.3, 0.25, 0.2, 0.15, 0.1]


class BoundTool(CommandTool):
    name: str = "bound"
    description: str = """Minimum number of ratings for the majority or average rule.
Majority: honest by default, --f for random misbehavior, --f-prime with --target for the
number of ratings that resists biased users (or, with --win, after which they win).
Average: --target-error for an absolute error target, or --epsilon for the raw frequency
bound; with --epsilon and --f / --f-prime the error interval under misbehavior is reported."""
    parameters: dict = p.schema(
        {
            "rule": p.RULE,
            "alpha": p.ALPHA,
            "dataset": p.DATASET,
            "item": p.ITEM,
            "m": p.M,
            "delta": p.DELTA,
            "target_error": p.TARGET_ERROR,
            "epsilon": p.EPSILON,
            "f": p.F,
            "f_prime": p.F_PRIME,
            "target": p.TARGET,
            "win": p.WIN,
        }
    )

    def run(self, run_config: RunConfig) -> Report:
        rule = single_rule(run_config)
        profile = run_config.profile()
        if rule == AggregationRule.MAJORITY:
            result = self._majority(run_config)
        elif run_config.epsilon is not None and profile.kind != MisbehaviorKind.HONEST:
            return self._interval(run_config)
        elif run_config.epsilon is not None:
            result = self._epsilon(run_config)
        else:
            result = bounds.bound_for_profile(
                load_params(run_config),
                rule,
                run_config.delta,
                profile,
                run_config.target_error,
            )
        row = {
            "rule": rule.value,
            "misbehavior": profile.kind.value,
            "fraction": profile.fraction,
            "delta": run_config.delta,
            "raw": result.raw,
            "n_prime": result.n_prime,
        }
        return Report(run_config=run_config, result=result.model_dump(mode="json"), rows=[row])

    @staticmethod
    def _majority(run_config: RunConfig):
        params = load_params(run_config)
        if run_config.win:
            require(run_config, "f_prime")
            return bounds.biased_win_bound(
                params, run_config.delta, run_config.f_prime, run_config.target
            )
        return bounds.bound_for_profile(
            params, AggregationRule.MAJORITY, run_config.delta, run_config.profile()
        )

    @staticmethod
    def _epsilon(run_config: RunConfig):
        if run_config.alpha is None and run_config.dataset is None:
            require(run_config, "m")
            return bounds.average_honest_bound(run_config.epsilon, run_config.m, run_config.delta)
        params = load_params(run_config)
        return bounds.average_honest_bound(
            run_config.epsilon, params.m, run_config.delta, true_mean(params.alpha)
        )

    @staticmethod
    def _interval(run_config: RunConfig) -> Report:
        params = load_params(run_config)
        if run_config.f is not None:
            interval = bounds.average_random_interval(
                params, run_config.epsilon, run_config.f, run_config.delta
            )
        else:
            interval = bounds.average_biased_interval(
                params, run_config.epsilon, run_config.f_prime, run_config.target, run_config.delta
            )
        result = interval.model_dump(mode="json")
        return Report(run_config=run_config, result=result, rows=[result])


class ThresholdTool(CommandTool):
    name: str = "threshold"
    description: str = """Smallest fraction of biased users that lets a target level win the majority.
Without --target every level other than the true label is listed."""
    parameters: dict = p.schema(
        {
            "alpha": p.ALPHA,
            "dataset": p.DATASET,
            "item": p.ITEM,
            "m": p.M,
            "target": p.TARGET,
        }
    )

    def run(self, run_config: RunConfig) -> Report:
        params = load_params(run_config)
        if run_config.target is not None:
            targets = [run_config.target]
        else:
            label = ground_truth(params).label
            targets = [level for level in params.scale.levels if level != label]
        rows = [
            {"target": target, "threshold": bounds.biased_win_threshold(params, target)}
            for target in targets
        ]
        return Report(run_config=run_config, result=rows, rows=rows)


class SweepTool(CommandTool):
    name: str = "sweep"
    description: str = """Minimum number of ratings as delta, the random fraction or the biased fraction varies.
Points where no bound exists report the error instead."""
    parameters: dict = p.schema(
        {
            "rule": p.RULE,
            "alpha": p.ALPHA,
            "dataset": p.DATASET,
            "item": p.ITEM,
            "m": p.M,
            "variable": p.VARIABLE,
            "values": p.VALUES,
            "delta": p.DELTA,
            "target_error": p.TARGET_ERROR,
            "target": p.TARGET,
        },
        required=["variable", "values"],
    )

    def run(self, run_config: RunConfig) -> Report:
        require(run_config, "variable", "values")
        points = bounds.sweep(
            load_params(run_config),
            single_rule(run_config),
            run_config.variable,
            run_config.values,
            delta=run_config.delta,
            target_error=run_config.target_error,
            target=run_config.target,
        )
        rows = [point.model_dump(mode="json") for point in points]
        return Report(run_config=run_config, result=rows, rows=rows)


class CompareTool(CommandTool):
    name: str = "compare"
    description: str = """Majority against average minimum number of ratings across failure probabilities."""
    parameters: dict = p.schema(
        {
            "alpha": p.ALPHA,
            "dataset": p.DATASET,
            "item": p.ITEM,
            "m": p.M,
            "deltas": p.DELTAS,
            "target_error": p.TARGET_ERROR,
            "f": p.F,
            "f_prime": p.F_PRIME,
            "target": p.TARGET,
        }
    )

    def run(self, run_config: RunConfig) -> Report:
        require(run_config, "target_error")
        comparison = bounds.compare_rules(
            load_params(run_config),
            run_config.deltas or DEFAULT_DELTAS,
            run_config.target_error,
            run_config.profile(),
        )
        rows = [row.model_dump(mode="json") for row in comparison]
        return Report(run_config=run_config, result=rows, rows=rows)
