import json
import os
import sys
from typing import Any, Dict, Literal, Optional, Type

from dotenv import load_dotenv
from pydantic import BaseModel, Field, ValidationError, field_validator

load_dotenv()

DEFAULT_CONFIG_FILE = "holx.json"

ColorMode = Literal["auto", "never"]
LogLevel = Literal["DEBUG", "INFO", "WARNING", "ERROR"]


def get_default_config() -> Dict[str, Any]:
    return {
        "analysis": {"horizon": 2},
        "simulation": {"clock_step_ms": 1000},
        "output": {"color": "auto"},
        "logging": {"level": "WARNING", "file": None},
    }


def _notice(message: str):
    print(f"[CONFIG] {message}", file=sys.stderr)


def _at_least_one(value: Any, name: str) -> Any:
    """Integers below 1 are clamped; bools and non-numeric text are rejected."""
    if isinstance(value, bool):
        raise ValueError("expected an integer, got a boolean")
    if isinstance(value, str):
        value = int(value.strip())
    if isinstance(value, int) and value < 1:
        _notice(f"{name} {value} clamped to 1")
        return 1
    return value


# ============================================================================
# SETTINGS MODELS
# ============================================================================

class AnalysisSettings(BaseModel):
    horizon: int = Field(2, ge=1)

    @field_validator("horizon", mode="before")
    @classmethod
    def _clamp_horizon(cls, value):
        return _at_least_one(value, "analysis.horizon")


class SimulationSettings(BaseModel):
    clock_step_ms: int = Field(1000, ge=1)

    @field_validator("clock_step_ms", mode="before")
    @classmethod
    def _clamp_step(cls, value):
        return _at_least_one(value, "simulation.clock_step_ms")


class OutputSettings(BaseModel):
    color: ColorMode = "auto"

    @field_validator("color", mode="before")
    @classmethod
    def _lower(cls, value):
        return value.lower() if isinstance(value, str) else value


class LoggingSettings(BaseModel):
    level: LogLevel = "WARNING"
    file: Optional[str] = None

    @field_validator("level", mode="before")
    @classmethod
    def _upper(cls, value):
        return value.upper() if isinstance(value, str) else value


class HolxSettings(BaseModel):
    analysis: AnalysisSettings = AnalysisSettings()
    simulation: SimulationSettings = SimulationSettings()
    output: OutputSettings = OutputSettings()
    logging: LoggingSettings = LoggingSettings()


SECTIONS: Dict[str, Type[BaseModel]] = {
    name: info.annotation for name, info in HolxSettings.model_fields.items()
}


def _validate_section(name: str, values: Dict[str, Any]) -> BaseModel:
    """Validate one section; a rejected field falls back to its default."""
    model = SECTIONS[name]
    values = dict(values)
    try:
        return model.model_validate(values)
    except ValidationError as e:
        for error in e.errors():
            key = error["loc"][0] if error["loc"] else None
            if key in values:
                _notice(f"{name}.{key} {values.pop(key)!r} rejected ({error['msg']}); using default")
        return model.model_validate(values)


class ConfigManager:
    """
    Settings for holx

    Structure (holx.json, every key optional):
    {
        "analysis":   {"horizon": 2},
        "simulation": {"clock_step_ms": 1000},
        "output":     {"color": "auto"},
        "logging":    {"level": "WARNING", "file": null}
    }

    Environment overrides: HOLX_HORIZON, HOLX_COLOR, HOLX_LOG_LEVEL,
    HOLX_LOG_FILE. The file path itself comes from HOLX_CONFIG.
    """

    def __init__(self, config_file: Optional[str] = None):
        self.config_file = config_file or os.getenv("HOLX_CONFIG", DEFAULT_CONFIG_FILE)
        self.config: Dict[str, Any] = {}
        self.settings = HolxSettings()
        self.load_config()

    def load_config(self):
        merged = get_default_config()
        if os.path.exists(self.config_file):
            try:
                with open(self.config_file, "r", encoding="utf-8") as f:
                    loaded = json.load(f)
                if not isinstance(loaded, dict):
                    raise ValueError("top level must be an object")
                for section, values in loaded.items():
                    if section in merged and isinstance(values, dict):
                        merged[section].update(values)
                    else:
                        _notice(f"Ignoring unknown section '{section}' in {self.config_file}")
            except Exception as e:
                _notice(f"Error loading config {self.config_file}: {e}; using defaults")
                merged = get_default_config()

        self._apply_env(merged)
        self.settings = HolxSettings(**{name: _validate_section(name, merged[name]) for name in SECTIONS})
        self.config = self.settings.model_dump()

    @staticmethod
    def _apply_env(config: Dict[str, Any]):
        env_map = {
            "HOLX_HORIZON": ("analysis", "horizon"),
            "HOLX_COLOR": ("output", "color"),
            "HOLX_LOG_LEVEL": ("logging", "level"),
            "HOLX_LOG_FILE": ("logging", "file"),
        }
        for var, (section, key) in env_map.items():
            value = os.getenv(var)
            if value:
                config[section][key] = value

    def get_config(self) -> Dict[str, Any]:
        return self.config

    @property
    def horizon(self) -> int:
        return self.settings.analysis.horizon

    @property
    def clock_step_ms(self) -> int:
        return self.settings.simulation.clock_step_ms

    @property
    def color(self) -> str:
        return self.settings.output.color

    @property
    def log_level(self) -> str:
        return self.settings.logging.level

    @property
    def log_file(self) -> Optional[str]:
        return self.settings.logging.file
