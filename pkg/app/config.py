"""
Configuration management for the Levinson workbench.

Two layers: `SolverConfig` holds the numeric knobs handed to the kernels and
`RunConfig` holds everything a CLI run or tool call needs. RunConfig reads
`LEVWB_*` environment variables and `.env`; a flat key=value config file can
be layered on top with `load_run_config`.
"""
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Optional

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.utils.errors import DomainError, OutputError, UsageError


def _describe(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err.get("loc", ())) or "config"
        parts.append(f"{loc}: {err.get('msg')}")
    return "; ".join(parts)


class SolverConfig(BaseModel):
    """Numeric settings for the Numerov engine (immutable, hashable)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x_max: float = Field(default=20.0, description="Half-width of the integration box")
    h: float = Field(default=1e-3, description="Grid step")
    match_tol: float = Field(default=1e-9, description="Largest |v| tolerated in the matching window")
    energy_tol: float = Field(default=1e-10, description="Bisection tolerance for bound-state energies")
    zero_energy_slope_tol: float = Field(default=1e-6, description="Criticality threshold on |beta|*x_max/|alpha|")
    energy_mesh: int = Field(default=400, description="Energy mesh size for bound-state bracketing")

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as exc:
            raise DomainError(f"Invalid solver configuration: {_describe(exc)}") from exc

    @field_validator("x_max")
    @classmethod
    def _check_x_max(cls, value: float) -> float:
        if not value >= 10.0:
            raise ValueError("x_max must be >= 10")
        return value

    @field_validator("h")
    @classmethod
    def _check_h(cls, value: float) -> float:
        if not 0.0 < value <= 0.01:
            raise ValueError("h must satisfy 0 < h <= 0.01")
        return value

    @field_validator("match_tol", "energy_tol", "zero_energy_slope_tol")
    @classmethod
    def _check_tol(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError("tolerances must be > 0")
        return value

    @field_validator("energy_mesh")
    @classmethod
    def _check_mesh(cls, value: int) -> int:
        if value < 10:
            raise ValueError("energy_mesh must be >= 10")
        return value


class RunConfig(BaseSettings):
    """Run settings for the CLI and the tool server"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        env_prefix="LEVWB_",
        extra="ignore",
    )

    # Server
    mcp_server_name: str = Field(default="levinson-workbench", description="MCP server name")

    # Solver
    x_max: float = Field(default=20.0, description="Integration half-width")
    step: float = Field(default=1e-3, description="Numerov grid step")
    tol: float = Field(default=1e-9, description="Asymptotic matching tolerance")
    energy_tol: float = Field(default=1e-10, description="Bound-state bisection tolerance")
    zero_energy_slope_tol: float = Field(default=1e-6, description="Criticality threshold")
    energy_mesh: int = Field(default=400, description="Bound-state energy mesh size")

    # Sweep
    k_min: float = Field(default=0.05, description="Smallest momentum of the sweep")
    k_max: float = Field(default=10.0, description="Largest momentum of the sweep")
    k_steps: int = Field(default=200, description="Number of geometric sweep points")

    # Output
    format: Literal["csv", "json"] = Field(default="csv", description="Output format")
    out: str = Field(default="-", description="Output path, '-' for standard output")
    degrees: bool = Field(default=False, description="Render phases in degrees on standard output")

    # Execution and logging
    workers: int = Field(default=1, ge=1, description="Worker threads for per-k sweeps")
    log_level: str = Field(default="WARNING", description="Logging level (DEBUG, INFO, WARNING, ERROR)")
    log_json: bool = Field(default=False, description="Emit JSON log lines")

    def __init__(self, **data: Any):
        try:
            super().__init__(**data)
        except ValidationError as exc:
            raise DomainError(f"Invalid run configuration: {_describe(exc)}") from exc

    @field_validator("log_level")
    @classmethod
    def _check_log_level(cls, value: str) -> str:
        level = value.strip().upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level {value!r}")
        return level

    @model_validator(mode="after")
    def _check_sweep(self) -> "RunConfig":
        if not self.k_min > 0.0:
            raise ValueError("k_min must be > 0")
        if self.k_steps < 2:
            raise ValueError("k_steps must be >= 2")
        if not self.k_max > self.k_min:
            raise ValueError("k_max must exceed k_min")
        return self

    def solver(self) -> SolverConfig:
        """Build the SolverConfig carried by this run"""
        return SolverConfig(
            x_max=self.x_max,
            h=self.step,
            match_tol=self.tol,
            energy_tol=self.energy_tol,
            zero_energy_slope_tol=self.zero_energy_slope_tol,
            energy_mesh=self.energy_mesh,
        )

    @property
    def to_stdout(self) -> bool:
        return self.out in ("-", "")


def read_config_file(path: str) -> Dict[str, str]:
    """
    Parse a flat key=value config file.

    Keys mirror flag names with dashes turned into underscores. Unknown keys
    and keys without a value are usage errors.
    """
    file_path = Path(path)
    if not file_path.is_file():
        raise OutputError(f"Config file not found: {path}")

    raw = dotenv_values(file_path)
    known = set(RunConfig.model_fields)
    values: Dict[str, str] = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_").lower()
        if name not in known:
            raise UsageError(f"Unknown config key '{key}' in {path}")
        if value is None:
            raise UsageError(f"Config key '{key}' in {path} has no value")
        values[name] = value
    return values


def load_run_config(
    overrides: Optional[Mapping[str, Any]] = None,
    config_file: Optional[str] = None,
) -> RunConfig:
    """
    Resolve a RunConfig.

    Precedence: explicit override > config-file key > LEVWB_ environment >
    built-in default. Overrides set to None count as absent.
    """
    merged: Dict[str, Any] = {}
    if config_file:
        merged.update(read_config_file(config_file))
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    return RunConfig(**merged)


# Global configuration instance
_config: Optional[RunConfig] = None


def get_config() -> RunConfig:
    """Get global configuration instance (singleton pattern)"""
    global _config
    if _config is None:
        _config = RunConfig()
    return _config


def reload_config() -> RunConfig:
    """Reload configuration from environment/file"""
    global _config
    _config = RunConfig()
    return _config
