from enum import Enum
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from app.exceptions import (
    EmptyInput,
    InvalidFraction,
    InvalidParams,
    OutOfScaleRating,
)


SIMPLEX_TOLERANCE = 1e-6
SMOOTHING_FLOOR = 1e-12


class AggregationRule(str, Enum):
    """Rating aggregation rules"""

    MAJORITY = "majority"
    AVERAGE = "average"


class MisbehaviorKind(str, Enum):
    """How misbehaving users rate"""

    HONEST = "honest"
    RANDOM = "random"
    BIASED = "biased"


class SamplerKind(str, Enum):
    """Honest rating samplers"""

    MARGINAL = "marginal"
    TWO_STAGE = "two_stage"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    TABLE = "table"


class RatingScale(BaseModel):
    """An m-level cardinal rating metric with levels 1..m."""

    model_config = ConfigDict(frozen=True)

    m: int

    @model_validator(mode="after")
    def check_levels(self) -> "RatingScale":
        if self.m < 2:
            raise InvalidParams(f"rating scale needs m >= 2, got {self.m}")
        return self

    @property
    def levels(self) -> List[int]:
        return list(range(1, self.m + 1))

    def check_rating(self, value: int, line: Optional[int] = None) -> int:
        if not 1 <= value <= self.m:
            raise OutOfScaleRating(value, self.m, line)
        return value


class DirichletParams(BaseModel):
    """Collective rating behavior of one item: a point on the simplex.

    Inputs within 1e-6 of the simplex are renormalized; anything further off
    is rejected. Every component must be strictly positive.
    """

    model_config = ConfigDict(frozen=True)

    alpha: Tuple[float, ...]

    @model_validator(mode="before")
    @classmethod
    def normalize(cls, data):
        if isinstance(data, dict) and "alpha" in data:
            raw = list(data["alpha"])
            if len(raw) < 2:
                raise InvalidParams(f"alpha needs at least 2 components, got {len(raw)}")
            if any(not value > 0 for value in raw):
                raise InvalidParams(f"alpha components must be > 0: {raw}")
            total = sum(raw)
            if abs(total - 1) > SIMPLEX_TOLERANCE:
                raise InvalidParams(f"alpha must sum to 1, sums to {float(total)!r}")
            data = {**data, "alpha": tuple(float(value / total) for value in raw)}
        return data

    @classmethod
    def from_fractions(cls, values: Sequence[Fraction]) -> "DirichletParams":
        """Build from exact rationals so table parameters round-trip exactly."""
        return cls(alpha=tuple(Fraction(v) for v in values))

    @classmethod
    def from_inferred(cls, alpha_hat: Sequence[float]) -> "DirichletParams":
        """Floor zero estimates at 1e-12, then renormalize onto the simplex."""
        floored = [max(float(value), SMOOTHING_FLOOR) for value in alpha_hat]
        total = sum(floored)
        return cls(alpha=tuple(value / total for value in floored))

    @property
    def m(self) -> int:
        return len(self.alpha)

    @property
    def scale(self) -> RatingScale:
        return RatingScale(m=self.m)


class RatingMultiset(BaseModel):
    """Per-level counts of the observed ratings of one item."""

    model_config = ConfigDict(frozen=True)

    counts: Tuple[int, ...]

    @model_validator(mode="after")
    def check_counts(self) -> "RatingMultiset":
        if len(self.counts) < 2:
            raise InvalidParams("a rating multiset needs at least 2 levels")
        if any(count < 0 for count in self.counts):
            raise InvalidParams(f"counts must be non-negative: {self.counts}")
        return self

    @computed_field
    @property
    def n(self) -> int:
        return sum(self.counts)

    @property
    def m(self) -> int:
        return len(self.counts)

    @classmethod
    def from_ratings(cls, ratings: Sequence[int], m: int) -> "RatingMultiset":
        scale = RatingScale(m=m)
        counts = [0] * m
        for rating in ratings:
            counts[scale.check_rating(int(rating)) - 1] += 1
        return cls(counts=tuple(counts))

    def require_ratings(self) -> "RatingMultiset":
        if self.n == 0:
            raise EmptyInput("operation needs at least one rating")
        return self


class MisbehaviorProfile(BaseModel):
    """Who rates dishonestly and how."""

    model_config = ConfigDict(frozen=True)

    kind: MisbehaviorKind = MisbehaviorKind.HONEST
    fraction: float = 0.0
    target: Optional[int] = None

    @model_validator(mode="after")
    def check_profile(self) -> "MisbehaviorProfile":
        if self.kind == MisbehaviorKind.HONEST:
            if self.fraction != 0 or self.target is not None:
                raise InvalidParams("an honest profile has no fraction and no target")
        elif self.kind == MisbehaviorKind.RANDOM:
            if not 0 <= self.fraction < 1:
                raise InvalidFraction(f"random fraction must be in [0,1), got {self.fraction}")
            if self.target is not None:
                raise InvalidParams("a random profile has no target")
        else:
            if not 0 <= self.fraction <= 1:
                raise InvalidFraction(f"biased fraction must be in [0,1], got {self.fraction}")
            if self.target is None or self.target < 1:
                raise InvalidParams("a biased profile needs a target level >= 1")
        return self

    @classmethod
    def honest(cls) -> "MisbehaviorProfile":
        return cls()

    @classmethod
    def random(cls, fraction: float) -> "MisbehaviorProfile":
        return cls(kind=MisbehaviorKind.RANDOM, fraction=fraction)

    @classmethod
    def biased(cls, fraction: float, target: int) -> "MisbehaviorProfile":
        return cls(kind=MisbehaviorKind.BIASED, fraction=fraction, target=target)

    def check_scale(self, m: int) -> "MisbehaviorProfile":
        if self.target is not None and not 1 <= self.target <= m:
            raise OutOfScaleRating(self.target, m)
        return self


class GroundTruth(BaseModel):
    """Infinite-sample outcomes of both aggregation rules."""

    model_config = ConfigDict(frozen=True)

    label: int
    mean: float
    runner_up: float


class AggregateResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    rule: AggregationRule
    label: Optional[int] = None
    score: Optional[float] = None
    n: int
    tie: bool = False

    @model_validator(mode="after")
    def check_outcome(self) -> "AggregateResult":
        if self.rule == AggregationRule.MAJORITY:
            if self.label is None or self.score is not None:
                raise InvalidParams("majority results carry a label only")
        elif self.score is None or self.label is not None:
            raise InvalidParams("average results carry a score only")
        return self


class BoundRequest(BaseModel):
    """Echo of the inputs that produced a bound."""

    model_config = ConfigDict(frozen=True)

    rule: AggregationRule
    alpha: Optional[Tuple[float, ...]] = None
    m: int
    delta: float
    profile: MisbehaviorProfile = Field(default_factory=MisbehaviorProfile)
    target_error: Optional[float] = None
    epsilon: Optional[float] = None


class BoundResult(BaseModel):
    """A real-valued bound and its integerized minimum number of ratings."""

    model_config = ConfigDict(frozen=True)

    raw: float = Field(..., gt=0)
    inputs: BoundRequest

    @computed_field
    @property
    def n_prime(self) -> int:
        # half-up rounding, never below one rating
        return max(1, int(self.raw + 0.5))


class ErrorInterval(BaseModel):
    """Two-sided range for |average score - true mean|."""

    model_config = ConfigDict(frozen=True)

    lower: float = Field(..., ge=0)
    upper: float = Field(..., gt=0)
    confidence: Optional[float] = None
    min_ratings: Optional[int] = None

    @model_validator(mode="after")
    def check_order(self) -> "ErrorInterval":
        if self.lower > self.upper:
            raise InvalidParams(f"interval lower {self.lower} exceeds upper {self.upper}")
        return self


class InferredParams(BaseModel):
    """Maximum-likelihood estimate of alpha from observed counts."""

    model_config = ConfigDict(frozen=True)

    alpha_hat: Tuple[float, ...]
    counts: Tuple[int, ...]
    n: int

    @property
    def m(self) -> int:
        return len(self.alpha_hat)

    def to_params(self) -> DirichletParams:
        return DirichletParams.from_inferred(self.alpha_hat)


class SimConfig(BaseModel):
    """One Monte Carlo experiment. Identical configs give identical outcomes."""

    model_config = ConfigDict(frozen=True)

    params: DirichletParams
    profile: MisbehaviorProfile = Field(default_factory=MisbehaviorProfile)
    n: int = Field(..., ge=1)
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    sampler: SamplerKind = SamplerKind.MARGINAL
    exact_count: bool = False
    block_size: int = Field(256, ge=1)

    @model_validator(mode="after")
    def check_target(self) -> "SimConfig":
        self.profile.check_scale(self.params.m)
        return self


class FailureEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    failures: int
    trials: int

    @computed_field
    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @computed_field
    @property
    def std_err(self) -> float:
        rate = self.rate
        return (rate * (1 - rate) / self.trials) ** 0.5


class RatingEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    item_id: str
    user_id: str
    rating: int
    timestamp: int = Field(..., ge=0)


class ItemHistory(BaseModel):
    """Ratings of one item in (timestamp, input order) order."""

    model_config = ConfigDict(frozen=True)

    item_id: str
    ratings: Tuple[int, ...]
    timestamps: Tuple[int, ...]
    user_ids: Tuple[str, ...]

    def __len__(self) -> int:
        return len(self.ratings)

    def counts(self, m: int) -> RatingMultiset:
        return RatingMultiset.from_ratings(self.ratings, m)


class ItemValidation(BaseModel):
    item_id: str
    n_ratings: int
    n_prime: Optional[int] = None
    true_quality: float
    passed: int = 0
    failed: int = 0
    skipped_prefixes: int = 0


class ValidationReport(BaseModel):
    rule: AggregationRule
    delta: float
    target_error: Optional[float] = None
    online: bool = False
    n_test: int = 0
    n_reliable: int = 0
    per_item: List[ItemValidation] = Field(default_factory=list)
    skipped: List[str] = Field(
        default_factory=list, description="Items whose full-history alpha has a tied maximum"
    )
    excluded: List[str] = Field(
        default_factory=list, description="Items shorter than the minimum history"
    )

    @computed_field
    @property
    def f_reliable(self) -> float:
        return self.n_reliable / self.n_test if self.n_test else 0.0


class BucketFraction(BaseModel):
    lower: int
    upper: Optional[int] = None
    count: int
    fraction: float


class DistributionStats(BaseModel):
    rule: AggregationRule
    thresholds: List[int]
    survival: List[float]
    reference: int
    n_items: int
    n_satisfying: int
    f_satisfying: float
    buckets: List[BucketFraction] = Field(default_factory=list)
    n_primes: Dict[str, int] = Field(default_factory=dict)
    skipped: List[str] = Field(default_factory=list)
