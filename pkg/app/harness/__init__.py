from app.harness.distribution import min_ratings_distribution
from app.harness.ingest import ingest
from app.harness.synthetic import SyntheticSpec, generate_synthetic
from app.harness.validation import validate, validate_online


__all__ = [
    "ingest",
    "validate",
    "validate_online",
    "min_ratings_distribution",
    "SyntheticSpec",
    "generate_synthetic",
]
