"""Configuration Management with Pydantic.

Lab settings (analysis constants, statistics, runner limits, seeds) are
parsed from YAML and validated with Pydantic; selected keys can be
overridden through ``KMLAB_*`` environment variables.
"""

import os
import threading
from pathlib import Path
from typing import Any
import sys

if sys.version_info >= (3, 11):
    from typing import Self
else:
    from typing_extensions import Self

import structlog
import yaml
from pydantic import BaseModel, Field, model_validator

logger = structlog.get_logger(__name__)

# Analysis constants the bound checks are calibrated for
DEFAULT_BIG_THRESHOLD = 80.0
DEFAULT_SMALL_THRESHOLD = 2.0
DEFAULT_HIGH_MASS_MULTIPLIER = 8.0
DEFAULT_LOW_MASS_MULTIPLIER = 4.0
DEFAULT_AVERAGE_BOUND_FACTOR = 90.0
DEFAULT_TAIL_RATE_DIVISOR = 40.0
MAX_THREADS = 64


class PartitionConfig(BaseModel):
    """Weight thresholds splitting surviving elements into big/medium/small.

    Attributes:
        big_threshold: An element is big iff its weight is at least this value
        small_threshold: An element is small iff its weight is at most this value
    """

    big_threshold: float = Field(default=DEFAULT_BIG_THRESHOLD, gt=0)
    small_threshold: float = Field(default=DEFAULT_SMALL_THRESHOLD, gt=0)

    @model_validator(mode="after")
    def check_ordering(self) -> Self:
        """Require big_threshold > small_threshold > 0.

        Raises:
            ValueError: If the thresholds are not strictly ordered
        """
        if self.big_threshold <= self.small_threshold:
            msg = (
                f"big_threshold ({self.big_threshold}) must exceed "
                f"small_threshold ({self.small_threshold})"
            )
            raise ValueError(msg)
        return self

    model_config = {"frozen": True}


class BadnessConfig(BaseModel):
    """Constants of the bad-level analysis.

    Attributes:
        high_mass_multiplier: Big mass cap (times level) when |S| first hits 2·level
        low_mass_multiplier: Big mass floor (times level) when |S| first hits level
        average_bound_factor: Average weight never exceeds this times the worst bad level
        tail_rate_divisor: A level is bad with probability at most exp(-level / divisor)
    """

    high_mass_multiplier: float = Field(default=DEFAULT_HIGH_MASS_MULTIPLIER, gt=0)
    low_mass_multiplier: float = Field(default=DEFAULT_LOW_MASS_MULTIPLIER, gt=0)
    average_bound_factor: float = Field(default=DEFAULT_AVERAGE_BOUND_FACTOR, gt=0)
    tail_rate_divisor: float = Field(default=DEFAULT_TAIL_RATE_DIVISOR, gt=0)

    model_config = {"frozen": True}


class StatisticsConfig(BaseModel):
    """Settings shared by the Monte Carlo estimators.

    Attributes:
        confidence: Two-sided confidence level of every reported interval
        tv_threshold: Total-variation threshold for empirical sampler checks
        tolerance: Absolute float slack for distribution and bound checks
    """

    confidence: float = Field(default=0.99, gt=0.5, lt=1.0)
    tv_threshold: float = Field(default=0.01, gt=0.0, lt=1.0)
    tolerance: float = Field(default=1e-9, ge=0.0, le=1e-3)

    model_config = {"frozen": True}


class RunnerConfig(BaseModel):
    """Trial fan-out settings.

    Attributes:
        threads: Worker processes used for independent trials (1 = inline)
        chunk_size: Trials per worker job; fixes the merge order of results
        progress_log_interval_seconds: How often progress snapshots are logged
    """

    threads: int = Field(default=1, ge=1, le=MAX_THREADS)
    chunk_size: int = Field(default=1000, ge=1)
    progress_log_interval_seconds: float = Field(default=30.0, gt=0)


class LabConfig(BaseModel):
    """Main lab configuration combining all settings.

    Attributes:
        partition: Big/medium/small thresholds
        badness: Bad-level analysis constants
        statistics: Confidence levels and tolerances
        runner: Parallel trial settings
        master_seed: Seed every derived run seed descends from
        out_dir: Default directory for CSV outputs
        logging_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
    """

    partition: PartitionConfig = Field(default_factory=PartitionConfig)
    badness: BadnessConfig = Field(default_factory=BadnessConfig)
    statistics: StatisticsConfig = Field(default_factory=StatisticsConfig)
    runner: RunnerConfig = Field(default_factory=RunnerConfig)
    master_seed: int = Field(default=20240917, ge=0, lt=2**64)
    out_dir: str = Field(default="results", min_length=1)
    logging_level: str = Field(
        default="INFO",
        description="Logging level",
        pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
    )

    @classmethod
    def from_yaml(cls, path: str | Path) -> "LabConfig":
        """Load configuration from a YAML file.

        Args:
            path: Path to the YAML configuration file

        Returns:
            Parsed and validated LabConfig instance

        Raises:
            FileNotFoundError: If configuration file doesn't exist
            ValueError: If configuration is invalid
        """
        config_path = Path(path)

        if not config_path.exists():
            msg = f"Configuration file not found: {config_path}"
            raise FileNotFoundError(msg)

        logger.info("loading_configuration", path=str(config_path))

        try:
            with config_path.open() as f:
                config_data = yaml.safe_load(f)

            if not config_data:
                msg = "Configuration file is empty"
                raise ValueError(msg)

            config_data = cls._apply_env_overrides(config_data)
            config = cls(**config_data)
        except yaml.YAMLError as e:
            logger.exception("yaml_parse_error", error=str(e), path=str(config_path))
            msg = f"Invalid YAML in configuration file: {e}"
            raise ValueError(msg) from e
        else:
            logger.info(
                "configuration_loaded",
                threads=config.runner.threads,
                master_seed=config.master_seed,
                logging_level=config.logging_level,
            )
            return config

    @classmethod
    def _apply_env_overrides(cls, config_data: dict[str, Any]) -> dict[str, Any]:
        """Apply environment variable overrides to configuration.

        Environment variables follow the pattern KMLAB_<SECTION>_<KEY>,
        e.g. KMLAB_RUNNER_THREADS or KMLAB_PARTITION_BIG_THRESHOLD.

        Args:
            config_data: Base configuration dictionary from file

        Returns:
            Configuration dictionary with environment overrides applied
        """
        env_overrides: dict[tuple[str, ...], tuple[str, type]] = {
            ("partition", "big_threshold"): ("KMLAB_PARTITION_BIG_THRESHOLD", float),
            ("partition", "small_threshold"): ("KMLAB_PARTITION_SMALL_THRESHOLD", float),
            ("runner", "threads"): ("KMLAB_RUNNER_THREADS", int),
            ("runner", "chunk_size"): ("KMLAB_RUNNER_CHUNK_SIZE", int),
            ("master_seed",): ("KMLAB_MASTER_SEED", int),
            ("out_dir",): ("KMLAB_OUT_DIR", str),
            ("logging_level",): ("KMLAB_LOGGING_LEVEL", str),
        }

        for path, (env_var, caster) in env_overrides.items():
            value = os.environ.get(env_var)
            if value is None:
                continue
            current = config_data
            for key in path[:-1]:
                current = current.setdefault(key, {})
            current[path[-1]] = caster(value)
            logger.debug("env_override_applied", env_var=env_var, config_path=".".join(path))

        return config_data

    def validate_config(self) -> list[str]:
        """Validate configuration and return list of warnings.

        Returns:
            List of validation warning messages (empty if no warnings)
        """
        warnings = []

        if self.partition != PartitionConfig():
            warnings.append(
                "Partition thresholds differ from the analysis defaults (80, 2) - "
                "bound checks may legitimately fail",
            )
        if self.badness != BadnessConfig():
            warnings.append(
                "Bad-level constants differ from the analysis defaults - "
                "bound checks may legitimately fail",
            )

        cpu_count = os.cpu_count() or 1
        if self.runner.threads > cpu_count:
            warnings.append(
                f"runner.threads ({self.runner.threads}) exceeds CPU count ({cpu_count})",
            )

        return warnings


class ConfigManager:
    """Configuration manager using singleton pattern."""

    _instance: LabConfig | None = None
    _init_lock: threading.Lock = threading.Lock()

    @classmethod
    def load_config(cls, config_path: str | Path | None = None) -> LabConfig:
        """Load configuration from file.

        Args:
            config_path: Path to configuration file. If None, looks for config.yaml
                or config.yml in the current directory and falls back to defaults.

        Returns:
            Loaded LabConfig instance

        Raises:
            FileNotFoundError: If an explicit config file does not exist
        """
        if config_path is None:
            for default_name in ["config.yaml", "config.yml"]:
                default_path = Path(default_name)
                if default_path.exists():
                    return LabConfig.from_yaml(default_path)
            logger.info("using_default_configuration")
            return LabConfig(**LabConfig._apply_env_overrides({}))

        return LabConfig.from_yaml(config_path)

    @classmethod
    def get_config(
        cls,
        config_path: str | Path | None = None,
        reload: bool = False,
    ) -> LabConfig:
        """Get configuration instance (singleton pattern).

        Uses double-checked locking so concurrent first calls load only once.

        Args:
            config_path: Path to configuration file. Only used on first call or when reload=True.
            reload: If True, force reload configuration from file.

        Returns:
            LabConfig instance
        """
        if cls._instance is not None and not reload:
            return cls._instance

        with cls._init_lock:
            if cls._instance is None or reload:
                cls._instance = cls.load_config(config_path)

            return cls._instance

    @classmethod
    def reset_config(cls) -> None:
        """Reset the configuration instance."""
        cls._instance = None


def load_config(config_path: str | Path | None = None) -> LabConfig:
    """Load configuration from file."""
    return ConfigManager.load_config(config_path)


def get_config(config_path: str | Path | None = None, reload: bool = False) -> LabConfig:
    """Get configuration instance (singleton pattern)."""
    return ConfigManager.get_config(config_path, reload)


def reset_config() -> None:
    """Reset the configuration instance."""
    ConfigManager.reset_config()


__all__ = [
    "BadnessConfig",
    "LabConfig",
    "PartitionConfig",
    "RunnerConfig",
    "StatisticsConfig",
    "get_config",
    "load_config",
    "reset_config",
]
