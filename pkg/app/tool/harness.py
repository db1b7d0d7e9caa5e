from pathlib import Path
from typing import Callable, ClassVar, Dict, List

from app.cli import Report, RunConfig, load_histories, require, rules
from app.config import config
from app.harness.distribution import min_ratings_distribution, survival_rows
from app.harness.ingest import detect_format
from app.harness.synthetic import (
    SyntheticSpec,
    generate_synthetic,
    render_dataset,
    render_truth,
    truth_path,
)
from app.harness.validation import validate, validate_online
from app.schema import ValidationReport
from app.tool import parameters as p
from app.tool.base import CommandTool


DEFAULT_THRESHOLDS = list(range(0, 2001, 50))

_HARNESS = {
    "dataset": p.DATASET,
    "m": p.M,
    "rule": p.RULE_OR_BOTH,
    "delta": p.DELTA,
    "target_error": p.TARGET_ERROR,
    "min_history": p.MIN_HISTORY,
}


def _summary(report: ValidationReport) -> dict:
    return {
        "rule": report.rule.value,
        "n_test": report.n_test,
        "n_reliable": report.n_reliable,
        "f_reliable": report.f_reliable,
        "items": len(report.per_item),
        "skipped": len(report.skipped),
        "excluded": len(report.excluded),
    }


class _ValidationTool(CommandTool):
    procedure: ClassVar[Callable] = staticmethod(validate)

    def run(self, run_config: RunConfig) -> Report:
        require(run_config, "dataset", "m")
        histories = load_histories(run_config)
        reports: Dict[str, ValidationReport] = {}
        for rule in rules(run_config):
            reports[rule.value] = self.procedure(
                histories,
                run_config.m,
                rule,
                run_config.delta,
                run_config.target_error,
                run_config.min_history,
            )
        result = {rule: report.model_dump(mode="json") for rule, report in reports.items()}
        if len(reports) == 2:
            average = reports["average"].n_test
            result["n_test_ratio"] = reports["majority"].n_test / average if average else None
        rows = [_summary(report) for report in reports.values()]
        return Report(run_config=run_config, result=result, rows=rows)


class ValidateTool(_ValidationTool):
    name: str = "validate"
    description: str = """Replay a rating log: every prefix at least as long as the item's n' is checked
against the quality estimated from the full history. With --rule both, the ratio of
tested prefixes between the rules is reported."""
    parameters: dict = p.schema(_HARNESS, required=["dataset", "m"])


class ValidateOnlineTool(_ValidationTool):
    name: str = "validate-online"
    description: str = """Replay a rating log, testing each prefix that meets the n' inferred from the prefix itself."""
    parameters: dict = p.schema(_HARNESS, required=["dataset", "m"])
    procedure: ClassVar[Callable] = staticmethod(validate_online)


class SurvivalTool(CommandTool):
    name: str = "survival"
    description: str = """Distribution of per-item n': the survival curve Pr[n' >= n], the share of items
with at least the reference number of ratings, and bucketed fractions. With --output, the
curve is also written as two-column CSV next to the report."""
    parameters: dict = p.schema(
        {
            **_HARNESS,
            "thresholds": p.THRESHOLDS,
            "reference": p.REFERENCE,
            "buckets": p.BUCKETS,
        },
        required=["dataset", "m"],
    )

    def run(self, run_config: RunConfig) -> Report:
        histories = load_histories(run_config)
        thresholds = run_config.thresholds or DEFAULT_THRESHOLDS
        result = {}
        files = {}
        curves: Dict[int, dict] = {threshold: {"n": threshold} for threshold in thresholds}
        for rule in rules(run_config):
            stats = min_ratings_distribution(
                histories,
                run_config.m,
                rule,
                run_config.delta,
                run_config.target_error,
                thresholds,
                run_config.reference,
                run_config.buckets,
                run_config.min_history,
            )
            result[rule.value] = stats.model_dump(mode="json")
            for threshold, survival in survival_rows(stats):
                curves[threshold][rule.value] = survival
            if run_config.output and config.harness.survival_csv:
                files[self._curve_path(run_config.output, rule.value)] = _curve_csv(stats)
        return Report(
            run_config=run_config, result=result, rows=list(curves.values()), files=files
        )

    @staticmethod
    def _curve_path(output: str, rule: str) -> str:
        return str(Path(output).with_suffix(f".{rule}.survival.csv"))


def _curve_csv(stats) -> str:
    lines = ["n,survival"]
    lines.extend(f"{threshold},{survival!r}" for threshold, survival in survival_rows(stats))
    return "\n".join(lines) + "\n"


class SynthTool(CommandTool):
    name: str = "synth"
    description: str = """Generate a deterministic synthetic rating log and its ground-truth sidecar.
Item alphas are drawn from a symmetric Dirichlet; --f or --f-prime with --target inject
misbehaving raters. The format follows the --output suffix (.csv or .jsonl); the sidecar
is written next to it as <name>.truth.jsonl."""
    parameters: dict = p.schema(
        {
            "items": p.ITEMS,
            "ratings_per_item": p.RATINGS_PER_ITEM,
            "m": p.M,
            "concentration": p.CONCENTRATION,
            "f": p.F,
            "f_prime": p.F_PRIME,
            "target": p.TARGET,
            "seed": p.SEED,
            "sampler": p.SAMPLER,
        },
        required=["items", "ratings_per_item", "output"],
    )
    writes_report: bool = False

    def run(self, run_config: RunConfig) -> Report:
        require(run_config, "items", "ratings_per_item", "output")
        spec = SyntheticSpec(
            items=run_config.items,
            ratings_per_item=run_config.ratings_per_item,
            m=run_config.m or 5,
            concentration=run_config.concentration,
            profile=run_config.profile(),
            seed=run_config.seed,
            sampler=run_config.sampler,
        )
        items = generate_synthetic(spec)
        sidecar = truth_path(run_config.output)
        files = {
            run_config.output: render_dataset(items, detect_format(run_config.output)),
            sidecar: render_truth(items),
        }
        rows: List[dict] = [
            item.truth.model_dump(include={"item_id", "label", "gamma"}) for item in items
        ]
        result = {
            "dataset": run_config.output,
            "truth": sidecar,
            "items": spec.items,
            "ratings": spec.items * spec.ratings_per_item,
        }
        return Report(run_config=run_config, result=result, rows=rows, files=files)
