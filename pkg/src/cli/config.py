"""Experiment configuration shared by command-line flags and TOML files."""

import re
import tomllib
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..core.errors import ConfigError

Command = Literal["rates", "tradeoff", "universal", "kl", "spectrum"]

# TOML keys mirror the flag names; these differ from the model's field names
FLAG_ALIASES = {
    "n": "n_list",
    "eps": "eps_list",
    "delta": "delta_list",
    "eval": "eval_sources",
}

_TOML_POSITION = re.compile(r"at line (\d+), column (\d+)")


class ExperimentConfig(BaseModel):
    """One sweep: a source, the grid of block lengths and targets, and output options."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    source: str | None = None
    n_list: list[int] = Field(default_factory=list)
    eps_list: list[float] = Field(default_factory=list)
    delta_list: list[float] = Field(default_factory=list)
    a: str | float = "H"
    b: float = 0.0
    d: int | None = Field(default=None, ge=2)
    eval_sources: list[str] = Field(default_factory=list)
    output: Path | None = None
    format: Literal["json", "csv"] = "csv"
    bits: bool = False
    jobs: int = Field(default=1, ge=1)
    cache: Path | None = None

    @field_validator("n_list")
    @classmethod
    def _strictly_increasing(cls, v: list[int]) -> list[int]:
        if any(n < 1 for n in v):
            raise ValueError("block lengths must be >= 1")
        if any(x >= y for x, y in zip(v, v[1:], strict=False)):
            raise ValueError("block lengths must be strictly increasing")
        return v

    @field_validator("eps_list")
    @classmethod
    def _open_unit_interval(cls, v: list[float]) -> list[float]:
        bad = [e for e in v if not 0.0 < e < 1.0]
        if bad:
            raise ValueError(f"eps values must lie in (0, 1), got {bad}")
        return v

    @field_validator("delta_list")
    @classmethod
    def _positive(cls, v: list[float]) -> list[float]:
        bad = [x for x in v if not x > 0.0]
        if bad:
            raise ValueError(f"delta values must be > 0, got {bad}")
        return v

    def require(self, *fields: str) -> None:
        """Raise ConfigError naming the first empty field the command needs."""
        for name in fields:
            if getattr(self, name) in (None, []):
                flag = next((k for k, v in FLAG_ALIASES.items() if v == name), name)
                raise ConfigError(f"{self.command} needs --{flag}", name)


def build_config(values: dict[str, Any]) -> ExperimentConfig:
    """Validate raw values, turning pydantic errors into a located ConfigError."""
    renamed = {FLAG_ALIASES.get(k, k).replace("-", "_"): v for k, v in values.items()}
    try:
        return ExperimentConfig.model_validate(renamed)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(first["msg"], location) from None


def load_config_file(path: str | Path, command: str) -> dict[str, Any]:
    """Read the ``[command]`` table of a TOML file."""
    path = Path(path)
    try:
        with open(path, "rb") as f:
            document = tomllib.load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config: {e.strerror}", str(path)) from None
    except tomllib.TOMLDecodeError as e:
        m = _TOML_POSITION.search(str(e))
        where = f"{path}:{m.group(1)}:{m.group(2)}" if m else str(path)
        raise ConfigError(str(e), where) from None
    section = document.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{command}] must be a table", str(path))
    return dict(section)


def merge_config(
    command: str, flags: dict[str, Any], config_path: str | Path | None = None
) -> ExperimentConfig:
    """File values first, then every flag that was actually given."""
    values: dict[str, Any] = {}
    if config_path is not None:
        values.update(load_config_file(config_path, command))
    values.update({k: v for k, v in flags.items() if v is not None})
    values["command"] = command
    return build_config(values)
