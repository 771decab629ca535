"""
Run configuration.

Sources, lowest precedence first: field defaults, MEISSNER_* environment
variables (a .env file is honoured), the config file, explicit overrides
(CLI flags or an HTTP request body).

Config files are either flat ``key=value`` text, with nested physical
parameters written as ``physical.radius_r=1e-6``, or a JSON object when the
file name ends in ``.json``.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, ValidationInfo, field_validator

from .exceptions import ConfigError
from .meissner_analysis import PhysicalParams

LOG = logging.getLogger(__name__)

ENV_PREFIX = "MEISSNER_"
DEFAULT_B_VALUES = [0.02, 0.04, 0.06, 0.1, 0.3, 0.5, 0.7, 0.9]
DEFAULT_KAPPA_VALUES = [0.5, 1.0, 2.0, 5.0, 10.0, 20.0]
KAPPA_MODES = ("solve-field", "self-consistent", "sweep")

Mode = Literal["solve-field", "eigensolve", "self-consistent", "sweep", "verify", "phase", "region"]


def _split_list(value: Any) -> Any:
    if isinstance(value, str):
        return [float(item) for item in value.replace(";", ",").split(",") if item.strip()]
    return value


class RunConfig(BaseModel):
    """Validated configuration of one batch run"""
    model_config = ConfigDict(extra="forbid")

    mode: Mode
    kappa: Optional[float] = Field(None, ge=0, validate_default=True)
    boundary_b: float = Field(0.9, gt=0)
    grid_n: int = Field(2001, ge=101)
    rho_max: float = Field(3.0, ge=1.0)
    tol: float = Field(1e-8, gt=0)
    max_iter: int = Field(500, ge=1)
    mixing: float = Field(0.5, gt=0, le=1)
    field_method: Literal["picard", "bessel-piecewise", "analytic"] = "picard"
    step_delta: Optional[float] = Field(None, gt=0, lt=1, validate_default=True)
    picard_scheme: Literal["axis", "contraction"] = "axis"
    relaxation: float = Field(1.0, gt=0, le=1)
    physical: Optional[PhysicalParams] = None
    output_path: Optional[str] = None
    output_format: Literal["csv", "json"] = "csv"
    density_path: Optional[str] = None
    b_point: float = Field(0.5, gt=0, le=1)
    b_values: List[float] = Field(default_factory=lambda: list(DEFAULT_B_VALUES))
    kappa_values: List[float] = Field(default_factory=lambda: list(DEFAULT_KAPPA_VALUES))
    tau: Optional[float] = Field(None, ge=0, validate_default=True)
    applied_h: Optional[float] = Field(None, ge=0, validate_default=True)
    workers: int = Field(1, ge=1)
    extend_grid: bool = True
    tail_decay: float = Field(20.0, gt=0)
    log_level: str = "INFO"
    log_dir: Optional[str] = None

    @field_validator("kappa")
    @classmethod
    def _kappa_for_mode(cls, value: Optional[float], info: ValidationInfo) -> Optional[float]:
        mode = info.data.get("mode")
        if value is None and mode in KAPPA_MODES:
            raise ValueError(f"kappa is required for mode={mode}")
        return value

    @field_validator("step_delta")
    @classmethod
    def _step_for_piecewise(cls, value: Optional[float], info: ValidationInfo) -> Optional[float]:
        if value is None and info.data.get("field_method") == "bessel-piecewise":
            raise ValueError("step_delta is required for field_method=bessel-piecewise")
        return value

    @field_validator("b_values", "kappa_values", mode="before")
    @classmethod
    def _parse_list(cls, value: Any) -> Any:
        return _split_list(value)

    @field_validator("b_values")
    @classmethod
    def _fields_below_one(cls, value: List[float]) -> List[float]:
        if not value or any(not 0.0 < b < 1.0 for b in value):
            raise ValueError("every sweep field must lie in (0, 1)")
        return value

    @field_validator("kappa_values")
    @classmethod
    def _kappas_nonnegative(cls, value: List[float]) -> List[float]:
        if not value or any(k < 0.0 for k in value):
            raise ValueError("kappa_values must be a non-empty list of non-negative numbers")
        return value

    @field_validator("tau")
    @classmethod
    def _tau_source(cls, value: Optional[float], info: ValidationInfo) -> Optional[float]:
        if value is None and info.data.get("mode") == "phase" and info.data.get("kappa") is None:
            raise ValueError("mode=phase needs tau or a kappa to sweep")
        return value

    @field_validator("applied_h")
    @classmethod
    def _field_for_phase(cls, value: Optional[float], info: ValidationInfo) -> Optional[float]:
        if value is None and info.data.get("mode") == "phase":
            raise ValueError("applied_h is required for mode=phase")
        return value

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, value: str) -> str:
        level = value.upper()
        if level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
            raise ValueError(f"unknown log level '{value}'")
        return level

    @property
    def physical_params(self) -> PhysicalParams:
        return self.physical or PhysicalParams()


def _nest(flat: Dict[str, Any]) -> Dict[str, Any]:
    """Turn dotted keys ('physical.radius_r') into nested dicts"""
    nested: Dict[str, Any] = {}
    for key, value in flat.items():
        head, _, rest = key.partition(".")
        if rest:
            nested.setdefault(head, {})[rest] = value
        else:
            nested[key] = value
    return nested


def env_overrides() -> Dict[str, Any]:
    """MEISSNER_<KEY> environment variables for the flat RunConfig keys"""
    load_dotenv()
    found = {}
    for name in RunConfig.model_fields:
        if name == "physical":
            continue
        value = os.getenv(f"{ENV_PREFIX}{name.upper()}")
        if value is not None:
            found[name] = value
    return found


def read_config_file(path: str) -> Dict[str, Any]:
    """Raw key/value content of a flat or JSON config file"""
    file = Path(path)
    if not file.is_file():
        raise ConfigError(f"config file not found: {path}", key="config")
    if file.suffix.lower() == ".json":
        try:
            with open(file, "r", encoding="utf-8") as f:
                content = json.load(f)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}", key="config") from exc
        if not isinstance(content, dict):
            raise ConfigError(f"{path} must hold a JSON object", key="config")
        return content
    flat = dotenv_values(file)
    missing = [key for key, value in flat.items() if value is None]
    if missing:
        raise ConfigError(f"key without value in {path}: {missing[0]}", key=missing[0])
    return _nest(dict(flat))


def _validation_error(exc: ValidationError) -> ConfigError:
    first = exc.errors()[0]
    key = ".".join(str(part) for part in first["loc"]) or "config"
    return ConfigError(f"{key}: {first['msg']}", key=key)


def build_config(values: Dict[str, Any], use_env: bool = True) -> RunConfig:
    """Validate values layered over the environment"""
    merged: Dict[str, Any] = env_overrides() if use_env else {}
    for key, value in values.items():
        if key == "physical" and isinstance(value, dict) and isinstance(merged.get("physical"), dict):
            merged["physical"] = {**merged["physical"], **value}
        elif value is not None:
            merged[key] = value
    try:
        return RunConfig(**merged)
    except ValidationError as exc:
        raise _validation_error(exc) from exc


def load_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None, use_env: bool = True) -> RunConfig:
    """
    Load and validate a run configuration.

    Args:
        path: Flat key=value or JSON config file; None for defaults only
        overrides: Values taking precedence over the file (CLI flags)
        use_env: Layer MEISSNER_* environment variables under the file

    Returns:
        Fully defaulted RunConfig
    """
    values: Dict[str, Any] = read_config_file(path) if path else {}
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "physical" and isinstance(value, dict):
            values["physical"] = {**values.get("physical", {}), **value}
        else:
            values[key] = value
    config = build_config(values, use_env=use_env)
    LOG.debug(f"loaded config from {path or 'defaults'}")
    return config
