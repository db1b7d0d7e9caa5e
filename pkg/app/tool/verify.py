from app.cli import Report, RunConfig, load_params, single_rule
from app.simulation import verify_bound
from app.tool import parameters as p
from app.tool.base import CommandTool


class MonteCarloVerifyTool(CommandTool):
    name: str = "mc-verify"
    description: str = """Check a bound by seeded simulation at its minimum number of ratings.
Majority bounds pass when the failure rate stays within delta plus three standard errors;
average bounds pass when the (1 - delta)-quantile of the error lies in the predicted interval.
Exit status 1 when the check fails."""
    parameters: dict = p.schema(
        {
            "rule": p.RULE,
            "alpha": p.ALPHA,
            "dataset": p.DATASET,
            "item": p.ITEM,
            "m": p.M,
            "delta": p.DELTA,
            "target_error": p.TARGET_ERROR,
            "f": p.F,
            "f_prime": p.F_PRIME,
            "target": p.TARGET,
            "n": p.N,
            **p.SIMULATION,
        }
    )

    def run(self, run_config: RunConfig) -> Report:
        verification = verify_bound(
            load_params(run_config),
            single_rule(run_config),
            run_config.delta,
            run_config.profile(),
            target_error=run_config.target_error,
            trials=run_config.trials,
            seed=run_config.seed,
            sampler=run_config.sampler,
            exact_count=run_config.exact_count,
            block_size=run_config.block_size,
            workers=run_config.workers,
            n=run_config.n,
        )
        row = verification.model_dump(
            mode="json", include={"check", "n", "observed", "limit", "passed"}
        )
        return Report(
            run_config=run_config,
            result=verification.model_dump(mode="json"),
            rows=[row],
            passed=verification.passed,
        )
