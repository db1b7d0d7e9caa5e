"""Resolved command configuration and report rendering.

Every command runs from a single ``RunConfig`` that merges, in increasing
precedence, the settings file, an optional ``--config`` override file and
the explicit flags. Reports embed that config so any run can be repeated.
"""

import csv
import io
import json
from fractions import Fraction
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from app import bounds
from app.config import Config, config, load_overrides
from app.exceptions import InvalidInputs, InvalidParams, ToolError
from app.harness.ingest import ingest
from app.inference import infer_alpha
from app.schema import (
    AggregationRule,
    DirichletParams,
    ItemHistory,
    MisbehaviorProfile,
    OutputFormat,
    RatingMultiset,
    RatingScale,
    SamplerKind,
)


class RunConfig(BaseModel):
    """Fully resolved inputs of one command."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    rule: Literal["majority", "average", "both"] = "majority"
    m: Optional[int] = Field(None, ge=2, description="Rating scale size")
    alpha: Optional[str] = Field(None, description="Comma-separated alpha, decimals or fractions")
    dataset: Optional[str] = Field(None, description="Rating log (CSV or JSON lines)")
    item: Optional[str] = Field(None, description="Item of the dataset to use")
    ratings: Optional[List[int]] = Field(None, description="Inline ordered ratings")
    counts: Optional[List[int]] = Field(None, description="Inline per-level counts")
    delta: float
    target_error: Optional[float] = Field(None, gt=0)
    epsilon: Optional[float] = None
    f: Optional[float] = None
    f_prime: Optional[float] = None
    target: Optional[int] = Field(None, ge=1)
    win: bool = False
    n: Optional[int] = Field(None, ge=1)
    trials: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    # results never depend on the worker count, so it stays out of reports
    workers: int = Field(1, ge=1, exclude=True)
    sampler: SamplerKind = SamplerKind.MARGINAL
    exact_count: bool = False
    block_size: int = Field(256, ge=1)
    min_history: int = Field(0, ge=0)
    thresholds: Optional[List[int]] = None
    reference: Optional[int] = Field(None, ge=1)
    buckets: List[int] = Field(default_factory=list)
    items: Optional[int] = Field(None, ge=1)
    ratings_per_item: Optional[int] = Field(None, ge=1)
    concentration: float = Field(1.0, gt=0)
    variable: Optional[Literal["delta", "random", "biased"]] = None
    values: Optional[List[float]] = None
    deltas: Optional[List[float]] = None
    output: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    config: Optional[str] = Field(None, description="Override file the run was read from")

    @model_validator(mode="after")
    def check_sources(self) -> "RunConfig":
        if self.alpha is not None and self.dataset is not None:
            raise InvalidInputs("--alpha and --dataset are mutually exclusive")
        if self.ratings is not None and self.counts is not None:
            raise InvalidInputs("--ratings and --counts are mutually exclusive")
        if self.f is not None and self.f_prime is not None:
            raise InvalidInputs("--f (random) and --f-prime (biased) are mutually exclusive")
        if self.f_prime is not None and self.target is None:
            raise InvalidInputs("--f-prime needs --target, the level attackers vote for")
        if self.thresholds is not None and self.thresholds != sorted(self.thresholds):
            raise InvalidInputs(f"--thresholds must be sorted ascending: {self.thresholds}")
        # range errors come from the domain checks, under their own names
        bounds.check_delta(self.delta)
        for delta in self.deltas or []:
            bounds.check_delta(delta)
        if self.epsilon is not None:
            bounds.check_epsilon(self.epsilon)
        self.profile()
        return self

    def profile(self) -> MisbehaviorProfile:
        if self.f is not None:
            return MisbehaviorProfile.random(self.f)
        if self.f_prime is not None:
            return MisbehaviorProfile.biased(self.f_prime, self.target)
        return MisbehaviorProfile.honest()

    def report_dict(self) -> dict:
        return self.model_dump(mode="json", exclude_none=True)


def _settings_defaults(settings: Config) -> dict:
    return {
        "delta": settings.bounds.delta,
        "trials": settings.simulation.trials,
        "seed": settings.simulation.seed,
        "workers": settings.simulation.workers,
        "sampler": settings.simulation.sampler,
        "exact_count": settings.simulation.exact_count,
        "block_size": settings.simulation.block_size,
        "min_history": settings.harness.min_history,
        "buckets": list(settings.harness.buckets),
    }


def resolve_run_config(
    command: str, flags: Dict[str, Any], settings: Optional[Config] = None
) -> RunConfig:
    """Merge settings, the ``--config`` file and explicit flags, in that order."""
    settings = settings or config
    flags = {key: value for key, value in flags.items() if value is not None}
    overrides = {}
    if "config" in flags:
        try:
            overrides = load_overrides(flags["config"])
        except OSError as e:
            raise ToolError(f"cannot read config file {flags['config']}: {e.strerror}")
        except ValueError as e:
            raise ToolError(f"config file {flags['config']} is not valid TOML: {e}")

    merged = {**_settings_defaults(settings), **overrides, **flags, "command": command}
    needs_error = merged.get("rule", "majority") != "majority" or command == "compare"
    if needs_error and "target_error" not in merged and "epsilon" not in merged:
        merged["target_error"] = settings.bounds.target_error
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        error = e.errors()[0]
        where = ".".join(str(part) for part in error["loc"]) or "config"
        raise InvalidParams(f"{where}: {error['msg']}") from None


def parse_alpha(text: str, m: Optional[int] = None) -> DirichletParams:
    """Parse ``4/35,25/35,...`` or ``0.1,0.7,...`` as exact rationals."""
    try:
        values = [Fraction(part.strip()) for part in text.split(",")]
    except (ValueError, ZeroDivisionError):
        raise InvalidParams(f"cannot parse alpha {text!r}; use decimals or fractions like 4/35") from None
    params = DirichletParams.from_fractions(values)
    if m is not None and params.m != m:
        raise InvalidParams(f"alpha has {params.m} components but m={m}")
    return params


def single_rule(run_config: RunConfig) -> AggregationRule:
    if run_config.rule == "both":
        raise ToolError(f"{run_config.command} takes --rule majority or --rule average")
    return AggregationRule(run_config.rule)


def rules(run_config: RunConfig) -> List[AggregationRule]:
    if run_config.rule == "both":
        return [AggregationRule.MAJORITY, AggregationRule.AVERAGE]
    return [AggregationRule(run_config.rule)]


def require(run_config: RunConfig, *names: str) -> None:
    missing = [name for name in names if getattr(run_config, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise ToolError(f"{run_config.command} needs {flags}")


def load_histories(run_config: RunConfig) -> Dict[str, ItemHistory]:
    require(run_config, "dataset", "m")
    try:
        return ingest(run_config.dataset, RatingScale(m=run_config.m))
    except OSError as e:
        raise ToolError(f"cannot read dataset {run_config.dataset}: {e.strerror}")


def select_history(run_config: RunConfig, histories: Dict[str, ItemHistory]) -> ItemHistory:
    if run_config.item is not None:
        if run_config.item not in histories:
            raise InvalidInputs(f"item {run_config.item!r} not in {run_config.dataset}")
        return histories[run_config.item]
    if len(histories) != 1:
        raise ToolError(f"{run_config.dataset} holds {len(histories)} items; pick one with --item")
    return next(iter(histories.values()))


def load_params(run_config: RunConfig) -> DirichletParams:
    """Alpha from ``--alpha``, or estimated from one item of ``--dataset``."""
    if run_config.alpha is not None:
        return parse_alpha(run_config.alpha, run_config.m)
    if run_config.dataset is not None:
        history = select_history(run_config, load_histories(run_config))
        return infer_alpha(history.counts(run_config.m)).to_params()
    raise ToolError(f"{run_config.command} needs --alpha or --dataset")


def load_multiset(run_config: RunConfig) -> RatingMultiset:
    """Observed ratings from ``--counts``, ``--ratings`` or one dataset item."""
    if run_config.counts is not None:
        counts = RatingMultiset(counts=tuple(run_config.counts))
        if run_config.m is not None and counts.m != run_config.m:
            raise InvalidParams(f"--counts has {counts.m} levels but m={run_config.m}")
        return counts
    if run_config.ratings is not None:
        require(run_config, "m")
        return RatingMultiset.from_ratings(run_config.ratings, run_config.m)
    if run_config.dataset is not None:
        return select_history(run_config, load_histories(run_config)).counts(run_config.m)
    raise ToolError(f"{run_config.command} needs --counts, --ratings or --dataset")


class Report(BaseModel):
    """What a command produced, before rendering."""

    run_config: RunConfig
    result: Any = None
    rows: List[dict] = Field(default_factory=list)
    passed: Optional[bool] = None
    files: Dict[str, str] = Field(
        default_factory=dict, description="Extra files to write, path to content"
    )

    def payload(self) -> dict:
        payload = {"config": self.run_config.report_dict(), "result": self.result}
        if self.passed is not None:
            payload["passed"] = self.passed
        return payload

    def render(self, fmt: OutputFormat = OutputFormat.JSON) -> str:
        fmt = OutputFormat(fmt)
        if fmt == OutputFormat.JSON or not self.rows:
            return json.dumps(self.payload(), sort_keys=True, indent=2) + "\n"
        header = "# config " + json.dumps(self.run_config.report_dict(), sort_keys=True)
        if fmt == OutputFormat.CSV:
            return header + "\n" + render_csv(self.rows)
        return header + "\n" + render_table(self.rows)


def _columns(rows: List[dict]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        columns.extend(key for key in row if key not in columns)
    return columns


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def render_csv(rows: List[dict]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=_columns(rows), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(value) for key, value in row.items()})
    return buffer.getvalue()


def render_table(rows: List[dict]) -> str:
    columns = _columns(rows)
    cells = [[_cell(row.get(column)) for column in columns] for row in rows]
    widths = [
        max(len(column), *(len(line[i]) for line in cells)) for i, column in enumerate(columns)
    ]
    lines = ["  ".join(column.rjust(width) for column, width in zip(columns, widths))]
    lines.append("  ".join("-" * width for width in widths))
    lines.extend("  ".join(cell.rjust(width) for cell, width in zip(line, widths)) for line in cells)
    return "\n".join(lines) + "\n"
