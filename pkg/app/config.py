import os
import threading
from pathlib import Path
from typing import List, Literal


try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import BaseModel, Field

from app.exceptions import ConfigError


def get_project_root() -> Path:
    """Get the project root directory"""
    return Path(__file__).resolve().parent.parent


PROJECT_ROOT = get_project_root()

SEED_ENV_VAR = "RATEBOUND_SEED"


def parse_seed(text: str) -> int:
    """Seed from $RATEBOUND_SEED: a non-negative decimal integer."""
    try:
        seed = int(text)
    except ValueError:
        seed = -1
    if seed < 0:
        raise ConfigError(f"{SEED_ENV_VAR} must be a non-negative integer, got {text!r}")
    return seed


class SimulationSettings(BaseModel):
    trials: int = Field(10_000, description="Monte Carlo trials per estimate", ge=1)
    seed: int = Field(0, description="Root seed for every random stream", ge=0)
    workers: int = Field(1, description="Threads used to run trial blocks", ge=1)
    sampler: Literal["marginal", "two_stage"] = Field(
        "marginal", description="Honest rating sampler"
    )
    exact_count: bool = Field(
        False,
        description="Use exactly floor(f*n) attackers per trial instead of i.i.d. assignment",
    )
    block_size: int = Field(
        256, description="Trials per random substream block", ge=1
    )


class BoundSettings(BaseModel):
    delta: float = Field(0.2, description="Default failure probability", gt=0, lt=1)
    target_error: float = Field(
        0.5, description="Default absolute error target E_r for the average rule", gt=0
    )
    degenerate_gap: float = Field(
        1e-9,
        description="Smallest gap between the top two alpha components accepted by majority bounds",
        gt=0,
    )


class HarnessSettings(BaseModel):
    min_history: int = Field(
        0, description="Items with fewer ratings are excluded from validation", ge=0
    )
    buckets: List[int] = Field(
        default_factory=lambda: [400, 800, 1200],
        description="Upper edges for bucketed minimum-rating statistics",
    )
    survival_csv: bool = Field(
        True, description="Also write survival curves as two-column CSV"
    )


class LogSettings(BaseModel):
    print_level: str = Field("INFO", description="Level printed to stderr")
    logfile_level: str = Field("DEBUG", description="Level written to the log file")
    logfile: bool = Field(True, description="Whether to write a log file under logs/")


class AppConfig(BaseModel):
    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    bounds: BoundSettings = Field(default_factory=BoundSettings)
    harness: HarnessSettings = Field(default_factory=HarnessSettings)
    logging: LogSettings = Field(default_factory=LogSettings)


class Config:
    _instance = None
    _lock = threading.Lock()
    _initialized = False

    def __new__(cls):
        if cls._instance is None:
            with cls._lock:
                if cls._instance is None:
                    cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if not self._initialized:
            with self._lock:
                if not self._initialized:
                    self._config = None
                    self._load_initial_config()
                    self._initialized = True

    @staticmethod
    def _get_config_path() -> Path:
        root = PROJECT_ROOT
        config_path = root / "config" / "config.toml"
        if config_path.exists():
            return config_path
        example_path = root / "config" / "config.example.toml"
        if example_path.exists():
            return example_path
        raise FileNotFoundError("No configuration file found in config directory")

    def _load_config(self) -> dict:
        config_path = self._get_config_path()
        with config_path.open("rb") as f:
            return tomllib.load(f)

    def _load_initial_config(self):
        raw_config = self._load_config()

        simulation_config = dict(raw_config.get("simulation", {}))
        # the environment wins over the file so CI can pin a seed
        env_seed = os.environ.get(SEED_ENV_VAR)
        if env_seed:
            simulation_config["seed"] = parse_seed(env_seed)

        config_dict = {
            "simulation": SimulationSettings(**simulation_config),
            "bounds": BoundSettings(**raw_config.get("bounds", {})),
            "harness": HarnessSettings(**raw_config.get("harness", {})),
            "logging": LogSettings(**raw_config.get("logging", {})),
        }

        self._config = AppConfig(**config_dict)

    def reload(self) -> None:
        """Re-read the configuration file and environment"""
        with self._lock:
            self._load_initial_config()

    @property
    def simulation(self) -> SimulationSettings:
        return self._config.simulation

    @property
    def bounds(self) -> BoundSettings:
        return self._config.bounds

    @property
    def harness(self) -> HarnessSettings:
        return self._config.harness

    @property
    def logging(self) -> LogSettings:
        return self._config.logging

    @property
    def root_path(self) -> Path:
        """Get the root path of the application"""
        return PROJECT_ROOT


def load_overrides(path: Path) -> dict:
    """Read a key-value TOML file whose keys mirror command-line flags."""
    with Path(path).open("rb") as f:
        raw = tomllib.load(f)
    return {key.replace("-", "_"): value for key, value in raw.items()}


config = Config()
