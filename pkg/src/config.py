"""Configuration system for the moment toolkit."""

import os
import yaml
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional


@dataclass
class ToleranceConfig:
    """Positivity tolerance configuration."""
    psd_tolerance: float = 1e-10
    env_var: str = "MOMENTKIT_TOL"


@dataclass
class PartialConfig:
    """Partial-sequence validation configuration."""
    enumeration_cap: int = 12


@dataclass
class SpectralConfig:
    """Eigenvalue trajectory and determinacy heuristic configuration."""
    window: int = 4
    slope_threshold: float = 2.0
    floor: float = 1e-12
    max_workers: int = 1


@dataclass
class MeasuresConfig:
    """Atomic measure recovery configuration."""
    pivot_tolerance: float = 1e-10
    dedup_tolerance: float = 1e-9
    negative_weight_tolerance: float = 1e-12
    moment_match_tolerance: float = 1e-8


@dataclass
class CompletionConfig:
    """Completion configuration."""
    support_tolerance: float = 1e-9
    reproduction_tolerance: float = 1e-9


@dataclass
class PerturbationConfig:
    """Perturbation admissibility configuration."""
    node_tolerance: float = 1e-9
    weight_slack: float = 1e-12
    representation_tolerance: float = 1e-9


@dataclass
class OutputConfig:
    """Report output configuration."""
    indent: int = 2
    trajectory_csv: Optional[str] = None


@dataclass
class LoggingConfig:
    """Logging configuration."""
    level: str = "WARNING"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    console_output: bool = True
    file_output: bool = False
    log_file: str = "momentkit.log"


@dataclass
class MomentKitConfig:
    """Main configuration for the moment toolkit."""
    tolerance: ToleranceConfig = field(default_factory=ToleranceConfig)
    partial: PartialConfig = field(default_factory=PartialConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)
    measures: MeasuresConfig = field(default_factory=MeasuresConfig)
    completion: CompletionConfig = field(default_factory=CompletionConfig)
    perturbation: PerturbationConfig = field(default_factory=PerturbationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    logging: LoggingConfig = field(default_factory=LoggingConfig)

    @classmethod
    def from_dict(cls, config_dict: Optional[Dict[str, Any]]) -> "MomentKitConfig":
        config_dict = config_dict or {}
        return cls(
            tolerance=ToleranceConfig(**config_dict.get('tolerance', {})),
            partial=PartialConfig(**config_dict.get('partial', {})),
            spectral=SpectralConfig(**config_dict.get('spectral', {})),
            measures=MeasuresConfig(**config_dict.get('measures', {})),
            completion=CompletionConfig(**config_dict.get('completion', {})),
            perturbation=PerturbationConfig(**config_dict.get('perturbation', {})),
            output=OutputConfig(**config_dict.get('output', {})),
            logging=LoggingConfig(**config_dict.get('logging', {})),
        )

    @classmethod
    def from_yaml(cls, config_path: str) -> "MomentKitConfig":
        """Load configuration from YAML file."""
        with open(config_path, 'r') as f:
            config_dict = yaml.safe_load(f)
        return cls.from_dict(config_dict)

    def apply_env_overrides(self, environ: Optional[Dict[str, str]] = None) -> "MomentKitConfig":
        """Override the PSD tolerance from the environment variable named in the config."""
        environ = os.environ if environ is None else environ
        value = environ.get(self.tolerance.env_var)
        if value:
            try:
                self.tolerance.psd_tolerance = float(value)
            except ValueError:
                raise ValueError(f"{self.tolerance.env_var}={value!r} is not a number")
        return self

    def validate(self) -> bool:
        """Validate configuration parameters."""
        errors = []

        if not self.tolerance.psd_tolerance > 0:
            errors.append("tolerance.psd_tolerance must be positive")

        if self.partial.enumeration_cap < 0:
            errors.append("partial.enumeration_cap must be nonnegative")

        # Spectral heuristic
        if self.spectral.window < 2:
            errors.append("spectral.window must be at least 2")
        if self.spectral.slope_threshold <= 0:
            errors.append("spectral.slope_threshold must be positive")
        if self.spectral.floor < 0:
            errors.append("spectral.floor must be nonnegative")
        if self.spectral.max_workers < 1:
            errors.append("spectral.max_workers must be at least 1")

        for section in (self.measures, self.completion, self.perturbation):
            for name, value in asdict(section).items():
                if value < 0:
                    errors.append(f"{type(section).__name__}.{name} must be nonnegative")

        if self.output.indent < 0:
            errors.append("output.indent must be nonnegative")

        if self.logging.level not in ["DEBUG", "INFO", "WARNING", "ERROR"]:
            errors.append("logging.level must be one of DEBUG, INFO, WARNING, ERROR")

        if errors:
            raise ValueError("Configuration validation failed:\n" + "\n".join(errors))

        return True

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
