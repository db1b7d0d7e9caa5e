"""JSON-schema fragments shared by the command tools."""

from typing import Dict


RULE = {
    "type": "string",
    "description": "Aggregation rule.",
    "enum": ["majority", "average"],
}
RULE_OR_BOTH = {
    "type": "string",
    "description": "Aggregation rule, or both to compare them on the same data.",
    "enum": ["majority", "average", "both"],
}
M = {"type": "integer", "description": "Rating scale size; levels are 1..m."}
ALPHA = {
    "type": "string",
    "description": "Collective rating behavior, e.g. 4/35,25/35,3/35,2/35,1/35.",
}
DATASET = {
    "type": "string",
    "description": "Rating log with columns item_id,user_id,rating,timestamp (CSV or JSON lines).",
}
ITEM = {"type": "string", "description": "Item id within --dataset."}
DELTA = {"type": "number", "description": "Failure probability in (0,1)."}
TARGET_ERROR = {
    "type": "number",
    "description": "Absolute error target E_r for the average rule.",
}
EPSILON = {
    "type": "number",
    "description": "Relative frequency accuracy for the average rule, instead of --target-error.",
}
F = {"type": "number", "description": "Fraction of users rating uniformly at random."}
F_PRIME = {"type": "number", "description": "Fraction of users always rating --target."}
TARGET = {"type": "integer", "description": "Level biased users vote for."}
WIN = {
    "type": "boolean",
    "description": "Bound the ratings after which biased users control the majority label.",
}
N = {"type": "integer", "description": "Ratings per simulated set, instead of the bound's n'."}
TRIALS = {"type": "integer", "description": "Monte Carlo trials."}
SEED = {"type": "integer", "description": "Root seed."}
WORKERS = {"type": "integer", "description": "Threads running trial blocks."}
SAMPLER = {
    "type": "string",
    "description": "Honest sampler: marginal draws from alpha, two_stage draws a per-user pmf first.",
    "enum": ["marginal", "two_stage"],
}
EXACT_COUNT = {
    "type": "boolean",
    "description": "Use exactly floor(f*n) attackers per trial.",
}
BLOCK_SIZE = {"type": "integer", "description": "Trials per random substream block."}
RATINGS = {
    "type": "array",
    "items": {"type": "integer"},
    "description": "Ordered ratings, comma-separated.",
}
COUNTS = {
    "type": "array",
    "items": {"type": "integer"},
    "description": "Per-level rating counts, comma-separated.",
}
MIN_HISTORY = {
    "type": "integer",
    "description": "Items with fewer ratings are excluded.",
}
THRESHOLDS = {
    "type": "array",
    "items": {"type": "integer"},
    "description": "Ascending n values of the survival curve.",
}
REFERENCE = {
    "type": "integer",
    "description": "n' items must reach to count as satisfying; default is the median n'.",
}
BUCKETS = {
    "type": "array",
    "items": {"type": "integer"},
    "description": "Ascending upper edges for bucketed n' fractions.",
}
ITEMS = {"type": "integer", "description": "Number of synthetic items."}
RATINGS_PER_ITEM = {"type": "integer", "description": "Ratings per synthetic item."}
CONCENTRATION = {
    "type": "number",
    "description": "Symmetric Dirichlet concentration item alphas are drawn from.",
}
VARIABLE = {
    "type": "string",
    "description": "Swept quantity.",
    "enum": ["delta", "random", "biased"],
}
VALUES = {
    "type": "array",
    "items": {"type": "number"},
    "description": "Values of the swept quantity.",
}
DELTAS = {
    "type": "array",
    "items": {"type": "number"},
    "description": "Failure probabilities to compare at.",
}
OUTPUT = {"type": "string", "description": "Write the report here instead of stdout."}
FORMAT = {
    "type": "string",
    "description": "Report format; json is the stable contract.",
    "enum": ["json", "csv", "table"],
}
CONFIG = {
    "type": "string",
    "description": "TOML file of flag values; explicit flags win.",
}

COMMON = {"output": OUTPUT, "format": FORMAT, "config": CONFIG}
SIMULATION = {
    "trials": TRIALS,
    "seed": SEED,
    "workers": WORKERS,
    "sampler": SAMPLER,
    "exact_count": EXACT_COUNT,
    "block_size": BLOCK_SIZE,
}


def schema(properties: Dict[str, dict], required=()) -> dict:
    return {
        "type": "object",
        "properties": {**properties, **COMMON},
        "required": list(required),
    }
