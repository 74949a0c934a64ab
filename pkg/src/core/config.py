"""
Configuration
=============

Two layers:

- ``Settings``: process-level knobs read from the environment (prefix
  ``TMDNP_``) and an optional ``.env`` file.
- ``RunConfig``: the physics/analysis configuration of a run. The bundled
  ``paper.json`` preset is the base; a user file is deep-merged on top and
  the result validated with unknown keys rejected.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.errors import DataFileError, InvalidArgumentError

logger = logging.getLogger(__name__)

PRESET_DIR = Path(__file__).resolve().parent.parent / "presets"
PAPER_PRESET = PRESET_DIR / "paper.json"


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="TMDNP_", env_file=".env", extra="ignore")

    log_level: str = "INFO"
    preset_path: Path = PAPER_PRESET
    workers: int = Field(default=1, ge=1, description="Process-pool size for phase sweeps")


_settings: Optional[Settings] = None


def get_settings() -> Settings:
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LineSection(_Strict):
    shape: Literal["rectangular", "gaussian"] = "rectangular"
    center_ghz: float
    width_ghz: float = Field(gt=0, description="Full width (rectangular) or FWHM (gaussian)")
    n_points: int = Field(default=201, ge=3)

    @field_validator("n_points")
    @classmethod
    def _odd(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("n_points must be odd")
        return value


class LatticeSection(_Strict):
    T_ref_k: float = Field(default=4.0, gt=0)
    t1_ref_s: float = Field(default=1.0, gt=0)
    t1_exponent: float = 3.0
    c_ref_mm: float = Field(default=40.0, gt=0)
    gamma_ref_per_s: float = Field(ge=0)
    gamma_exponent: float = 2.0
    w_mw_per_s: float = Field(ge=0)
    mw_width_ghz: Optional[float] = Field(default=None, gt=0, description="Excitation HWHM; default two grid steps")
    mw_ghz: float


class ThresholdSection(_Strict):
    localization: float = Field(default=0.8, ge=0, le=1)
    tanh_residual: float = Field(default=0.1, gt=0)
    reversal_contrast: float = Field(default=1.0, gt=0)


class AnalysisSection(_Strict):
    baseline_degree: int = Field(default=3, ge=0, le=6)
    apodization_sigma_fraction: float = Field(default=1.0 / 3.0, gt=0)
    peak_window_hz: float = Field(default=2000.0, gt=0, description="Half-width of the peak fit window")
    sweep_threshold: float = Field(default=0.05, gt=0)
    coincidence_k: float = Field(default=2.0, gt=0)
    off_resonance_ghz: float = 187.52


class RegimeSection(_Strict):
    saturation: float = Field(default=0.5, ge=0, le=1)
    hole_width_ghz: Optional[float] = Field(default=None, gt=0, description="Default two grid steps")
    hole_depth: float = Field(default=1.0, ge=0, le=1)
    temperature_k: float = Field(default=1.5, gt=0)


class SweepSection(_Strict):
    c_grid: str = "10:100:19"
    t_grid: str = "1:20:20"


class RunConfig(_Strict):
    line: LineSection
    nuclei: Dict[str, float] = Field(description="Nucleus name -> Larmor frequency in MHz")
    nucleus: str = "13C"
    lattice: LatticeSection
    thresholds: ThresholdSection = ThresholdSection()
    analysis: AnalysisSection = AnalysisSection()
    regimes: RegimeSection = RegimeSection()
    sweep: SweepSection = SweepSection()

    @field_validator("nuclei")
    @classmethod
    def _positive_larmor(cls, value: Dict[str, float]) -> Dict[str, float]:
        for name, mhz in value.items():
            if mhz <= 0:
                raise ValueError(f"Larmor frequency of {name} must be positive")
        return value


def _deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict) and key != "nuclei":
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise DataFileError(f"Config file not found: {path}", path=str(path))
    except json.JSONDecodeError as e:
        raise DataFileError(f"Config file is not valid JSON: {e}", path=str(path))


def load_preset(path: Optional[Path] = None) -> Dict[str, Any]:
    return _read_json(Path(path) if path else get_settings().preset_path)


def load_run_config(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """Resolve the preset, an optional user file and in-memory overrides into a RunConfig."""
    data = load_preset()
    if path:
        data = _deep_merge(data, _read_json(Path(path)))
        logger.debug("Merged user config %s", path)
    if overrides:
        data = _deep_merge(data, overrides)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise InvalidArgumentError(f"Invalid configuration: {e}")
