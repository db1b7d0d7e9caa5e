"""Deterministic synthetic rating logs with a ground-truth sidecar.

Item ``i`` draws its alpha, ratings and timestamps from the substream
``(seed, i)``, so a dataset is identical for the same settings however it is
produced. Output uses the same CSV / JSON-lines schema the ingester reads.
"""

import csv
import io
import json
from pathlib import Path
from typing import Dict, Iterable, List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.harness.ingest import FIELDS
from app.logger import logger
from app.model import top_two, true_mean
from app.schema import DirichletParams, MisbehaviorProfile, SamplerKind, SimConfig
from app.simulation import sample_ratings, substream


class SyntheticSpec(BaseModel):
    """What to generate."""

    model_config = ConfigDict(frozen=True)

    items: int = Field(..., ge=1, description="Number of items")
    ratings_per_item: int = Field(..., ge=1, description="Ratings in every item history")
    m: int = Field(5, ge=2, description="Rating scale size")
    concentration: float = Field(
        1.0, gt=0, description="Symmetric Dirichlet concentration each item alpha is drawn from"
    )
    profile: MisbehaviorProfile = Field(default_factory=MisbehaviorProfile)
    seed: int = Field(0, ge=0, lt=2**64)
    sampler: SamplerKind = SamplerKind.MARGINAL
    start_time: int = Field(1_200_000_000, ge=0, description="Epoch seconds of the first rating")
    mean_gap: int = Field(3600, ge=1, description="Mean seconds between consecutive ratings")


class SyntheticTruth(BaseModel):
    """One sidecar line: the alpha an item was generated from."""

    item_id: str
    alpha: List[float]
    label: int
    gamma: float


class SyntheticItem(BaseModel):
    truth: SyntheticTruth
    ratings: List[int]
    timestamps: List[int]


def item_id(index: int) -> str:
    return f"item{index:05d}"


def generate_item(spec: SyntheticSpec, index: int) -> SyntheticItem:
    rng = substream(spec.seed, index)
    params = DirichletParams.from_inferred(rng.dirichlet([spec.concentration] * spec.m))
    config = SimConfig(
        params=params,
        profile=spec.profile,
        n=spec.ratings_per_item,
        seed=spec.seed,
        sampler=spec.sampler,
    )
    ratings = sample_ratings(config, rng)
    gaps = rng.integers(1, 2 * spec.mean_gap, size=spec.ratings_per_item, endpoint=True)
    timestamps = spec.start_time + np.cumsum(gaps) - gaps[0]

    label, _, _ = top_two(params.alpha)
    truth = SyntheticTruth(
        item_id=item_id(index),
        alpha=list(params.alpha),
        label=label + 1,
        gamma=true_mean(params.alpha),
    )
    return SyntheticItem(
        truth=truth,
        ratings=[int(r) for r in ratings],
        timestamps=[int(t) for t in timestamps],
    )


def generate_synthetic(spec: SyntheticSpec) -> List[SyntheticItem]:
    """Every item of the dataset, in item order."""
    items = [generate_item(spec, index) for index in range(spec.items)]
    logger.info(
        f"Generated {spec.items} items x {spec.ratings_per_item} ratings (seed={spec.seed})"
    )
    return items


def _records(items: Iterable[SyntheticItem]) -> Iterable[Tuple[str, str, int, int]]:
    for item in items:
        for j, (rating, ts) in enumerate(zip(item.ratings, item.timestamps)):
            yield item.truth.item_id, f"user{j:06d}", rating, ts


def render_dataset(items: List[SyntheticItem], fmt: str = "csv") -> str:
    """The rating log as text, in ``csv`` or ``jsonl``."""
    buffer = io.StringIO()
    if fmt == "jsonl":
        for record in _records(items):
            buffer.write(json.dumps(dict(zip(FIELDS, record))) + "\n")
    else:
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(FIELDS)
        writer.writerows(_records(items))
    return buffer.getvalue()


def render_truth(items: List[SyntheticItem]) -> str:
    """Ground-truth sidecar as JSON lines."""
    return "".join(
        json.dumps(item.truth.model_dump(), sort_keys=True) + "\n" for item in items
    )


def read_truth(lines: Iterable[str]) -> Dict[str, SyntheticTruth]:
    truths = {}
    for line in lines:
        if line.strip():
            truth = SyntheticTruth.model_validate_json(line)
            truths[truth.item_id] = truth
    return truths


def truth_path(dataset_path: str) -> str:
    """Sidecar location next to a dataset: ``data.csv`` -> ``data.truth.jsonl``."""
    return str(Path(dataset_path).with_suffix(".truth.jsonl"))
