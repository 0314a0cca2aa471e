"""Experiment configuration.

Values come from (lowest to highest precedence) model defaults, a YAML
key-value file, environment variables and explicit overrides (CLI flags).

Environment variables:
    DQ_SEED: Experiment seed.
    DQ_PARALLEL: Sweep worker count.
"""

import logging
import os
from enum import StrEnum
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from apps.dq_core.channels import BathModel, PerturbationModel
from apps.dq_core.errors import ConfigError

logger = logging.getLogger(__name__)

REFERENCE_EPS_GRID = [1e-3, 2e-3, 5e-3, 1e-2]
REFERENCE_LAMBDA_GRID = [0.1, 1.0]
REFERENCE_T_GRID = [0.02, 0.05, 0.1, 0.2]

BATH_KEYS = ("bath_dim", "omega", "g", "beta")
ENV_OVERRIDES = {"DQ_SEED": "seed", "DQ_PARALLEL": "parallel"}


class Scenario(StrEnum):
    UNENCODED = "unencoded"
    DFS_PERFECT = "dfs_perfect"
    DFS_PERTURBED = "dfs_perturbed"
    CONCATENATED = "concatenated"


class BathMode(StrEnum):
    EXACT = "exact"
    MARKOV = "markov"


# ─────────────────────────────────────────────────────────────────────────────
# Models
# ─────────────────────────────────────────────────────────────────────────────
class BathConfig(BaseModel):
    """Spin-bath parameters (H_B = omega·diag levels, V_z = g·hopping, thermal at beta)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    bath_dim: int = Field(2, ge=1, le=16)
    omega: float = 1.0
    g: float = 1.0
    beta: float = Field(1.0, ge=0)

    def to_model(self) -> BathModel:
        return BathModel.spin_bath(self.bath_dim, self.omega, self.g, self.beta)


def _check_grid(values: list[float], allow_empty: bool) -> list[float]:
    if not values and not allow_empty:
        raise ValueError("grid must not be empty")
    if any(v <= 0 for v in values):
        raise ValueError("grid values must be strictly positive")
    if any(b <= a for a, b in zip(values, values[1:], strict=False)):
        raise ValueError("grid values must be strictly increasing")
    return values


class ExperimentConfig(BaseModel):
    """One fidelity-decay experiment over a (lambda, epsilon, t) grid."""

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    scenario: Scenario = Scenario.DFS_PERTURBED
    lambda_: float = Field(1.0, alias="lambda", ge=0)
    epsilon: float = Field(1e-3, ge=0)
    t_grid: list[float] = Field(default_factory=lambda: list(REFERENCE_T_GRID))
    eps_grid: list[float] = Field(default_factory=lambda: list(REFERENCE_EPS_GRID))
    lambda_grid: list[float] = Field(default_factory=lambda: list(REFERENCE_LAMBDA_GRID))
    seed: int = Field(0, ge=0, lt=2**64)
    bath: BathMode = BathMode.MARKOV
    bath_model: BathConfig = Field(default_factory=BathConfig)
    noise_model: PerturbationModel = PerturbationModel.INDEPENDENT_DEPHASING
    inner: Literal["dephasing2", "collective4"] = "dephasing2"
    max_error_weight: int = Field(3, ge=1, le=10)
    parallel: int = Field(1, ge=1, le=256)
    output_format: Literal["csv", "json"] = Field("csv", alias="format")

    @field_validator("t_grid")
    @classmethod
    def validate_t_grid(cls, v: list[float]) -> list[float]:
        return _check_grid(v, allow_empty=False)

    @field_validator("eps_grid", "lambda_grid")
    @classmethod
    def validate_optional_grid(cls, v: list[float]) -> list[float]:
        return _check_grid(v, allow_empty=True)

    @field_validator("noise_model")
    @classmethod
    def validate_noise_model(cls, v: PerturbationModel) -> PerturbationModel:
        if v is PerturbationModel.RAW_BLOCK:
            raise ValueError("experiments use an independent_* noise model")
        return v

    @property
    def epsilons(self) -> list[float]:
        """Swept epsilon values, or the single ``epsilon`` when no grid is given."""
        return list(self.eps_grid) if self.eps_grid else [self.epsilon]

    @property
    def lambdas(self) -> list[float]:
        return list(self.lambda_grid) if self.lambda_grid else [self.lambda_]


# ─────────────────────────────────────────────────────────────────────────────
# Loading
# ─────────────────────────────────────────────────────────────────────────────
def read_config_file(path: Path) -> dict[str, Any]:
    """Parse a YAML key-value file into a dict.

    Raises:
        ConfigError: If the file is missing, unparsable or not a mapping.
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}") from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain key: value pairs")
    return data


def env_overrides() -> dict[str, Any]:
    """Config values set through environment variables."""
    values: dict[str, Any] = {}
    for var, key in ENV_OVERRIDES.items():
        raw = os.getenv(var)
        if raw:
            values[key] = raw
    return values


def _validation_message(e: ValidationError) -> str:
    parts = []
    for err in e.errors():
        loc = ".".join(str(x) for x in err["loc"])
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def build_experiment_config(
    path: Path | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """Merge file, environment and overrides into a validated ExperimentConfig.

    Flat bath keys (bath_dim, omega, g, beta) are gathered into ``bath_model``.
    ``None`` override values are ignored so unset CLI flags do not mask the file.

    Raises:
        ConfigError: On unreadable files or invalid values.
    """
    raw: dict[str, Any] = read_config_file(path) if path is not None else {}
    raw.update(env_overrides())
    raw.update({k: v for k, v in (overrides or {}).items() if v is not None})

    bath = {k: raw.pop(k) for k in BATH_KEYS if k in raw}
    if bath:
        raw["bath_model"] = {**dict(raw.get("bath_model") or {}), **bath}
    try:
        cfg = ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e
    logger.info(f"Loaded experiment config: scenario={cfg.scenario}, bath={cfg.bath}")
    return cfg


def load_bath_model(path: Path | None) -> BathModel:
    """BathModel from the bath keys of a config file (defaults when ``path`` is None)."""
    raw = read_config_file(path) if path is not None else {}
    try:
        bath_cfg = BathConfig.model_validate({k: raw[k] for k in BATH_KEYS if k in raw})
    except ValidationError as e:
        raise ConfigError(_validation_message(e)) from e
    return bath_cfg.to_model()


def parse_grid(text: str | None) -> list[float] | None:
    """Comma-separated floats; None passes through and "" means an empty grid."""
    if text is None:
        return None
    items = [s.strip() for s in text.split(",") if s.strip()]
    try:
        return [float(s) for s in items]
    except ValueError as e:
        raise ConfigError(f"Invalid grid '{text}': {e}") from e
