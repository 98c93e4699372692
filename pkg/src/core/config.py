"""
Configuration Module
pydantic models for run configuration plus the loader that merges
defaults, environment, config file and command-line overrides.
"""

from __future__ import annotations

import logging
import math
import os
from typing import Any, Dict, List, Literal, Mapping, Optional

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from src.core.exceptions import ConfigError

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "CPMG_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "data/output"


_WAVEFORM_PARAMS = {
    "constant": ({"level"}, set()),
    "linear": ({"rate"}, {"start"}),
    "harmonic": ({"amplitude", "period"}, {"offset", "phase"}),
    "bilinear": ({"start", "peak", "rate"}, set()),
    "tabulated": ({"tau", "values"}, set()),
}


class WaveformConfig(BaseModel):
    """One waveform; which fields apply depends on ``kind``."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["constant", "linear", "harmonic", "bilinear", "tabulated"]
    level: Optional[float] = None
    rate: Optional[float] = None
    start: Optional[float] = None
    amplitude: Optional[float] = None
    period: Optional[float] = None
    offset: Optional[float] = None
    phase: Optional[float] = None
    peak: Optional[float] = None
    tau: Optional[List[float]] = None
    values: Optional[List[float]] = None

    @model_validator(mode="after")
    def _check_kind_params(self) -> "WaveformConfig":
        required, optional = _WAVEFORM_PARAMS[self.kind]
        given = {name for name in self.parameters()}
        missing = sorted(required - given)
        unused = sorted(given - required - optional)
        if missing:
            raise ValueError(f"{self.kind} waveform requires {', '.join(missing)}")
        if unused:
            raise ValueError(f"{self.kind} waveform does not take {', '.join(unused)}")
        return self

    def parameters(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True, exclude={"kind"})

    def build(self):
        from src.core.factories import WaveformFactory
        from src.core import registry  # noqa: F401

        return WaveformFactory.create_waveform(self.kind, **self.parameters())


class ProfileConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    omega0: WaveformConfig
    omega1: WaveformConfig = Field(
        default_factory=lambda: WaveformConfig(kind="constant", level=1.0)
    )

    def build(self):
        from src.physics.profiles import FieldProfile

        return FieldProfile(self.omega0.build(), self.omega1.build())


class TimingConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    te_ratio: float = Field(default=15.0, gt=1.0)
    echo_count: int = Field(default=1000, ge=1)
    t90_ratio: float = Field(default=0.5, gt=0.0)
    excitation_phase: float = 0.5 * math.pi
    refocusing_phase: float = 0.0

    @model_validator(mode="after")
    def _excitation_fits(self) -> "TimingConfig":
        if self.t90_ratio + 1.0 > self.te_ratio:
            raise ValueError("excitation pulse must end before the first refocusing pulse")
        return self

    def build(self):
        from src.physics.bloch import SequenceTiming

        return SequenceTiming(**self.model_dump())


class SweepAxisConfig(BaseModel):
    """Either explicit ``values`` or ``start``/``stop``/``num`` (linear or log spacing)."""

    model_config = ConfigDict(extra="forbid")

    name: Literal["omega0", "omega1", "ramp0", "te_ratio"]
    values: Optional[List[float]] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    num: Optional[int] = Field(default=None, ge=1)
    spacing: Literal["linear", "log"] = "linear"

    @model_validator(mode="after")
    def _check_points(self) -> "SweepAxisConfig":
        ranged = (self.start, self.stop, self.num)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either values or start/stop/num, not both")
            if not self.values:
                raise ValueError("values must not be empty")
        elif any(v is None for v in ranged):
            raise ValueError("start, stop and num are required without values")
        elif self.spacing == "log" and (self.start <= 0.0 or self.stop <= 0.0):
            raise ValueError("log spacing needs positive start and stop")
        return self

    def points(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.num)
        return np.linspace(self.start, self.stop, self.num)


class SweepConfig(BaseModel):
    """Grid of one or two axes evaluated cell by cell."""

    model_config = ConfigDict(extra="forbid")

    quantity: Literal["adiabaticity", "nu0_crit", "nu1_crit", "alpha", "n_perp", "n_z", "final_a0"] = "adiabaticity"
    axes: List[SweepAxisConfig] = Field(min_length=1, max_length=2)
    omega0: float = 0.0
    omega1: float = Field(default=1.0, ge=0.0)
    ramp0: float = 0.0
    te_ratio: float = Field(default=15.0, gt=1.0)
    overlay_singular_points: bool = True
    singular_l_max: int = Field(default=3, ge=1)

    @field_validator("axes")
    @classmethod
    def _distinct_axes(cls, axes: List[SweepAxisConfig]) -> List[SweepAxisConfig]:
        names = [axis.name for axis in axes]
        if len(set(names)) != len(names):
            raise ValueError("sweep axes must be distinct")
        return axes


class RunConfig(BaseModel):
    """Complete, validated description of one CLI invocation."""

    model_config = ConfigDict(extra="forbid")

    scenario: Optional[str] = None
    timing: TimingConfig = Field(default_factory=TimingConfig)
    profile: Optional[ProfileConfig] = None
    sweep: Optional[SweepConfig] = None
    output_dir: str = DEFAULT_OUTPUT_DIR
    threads: Optional[int] = Field(default=None, ge=1)
    full_scale: bool = False
    substeps_per_interval: int = Field(default=4, ge=1)
    commutator_correction: bool = True
    threshold: float = Field(default=2.0, ge=0.0)
    scenario_params: Dict[str, Any] = Field(default_factory=dict)

    def resolved(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def _format_errors(error: ValidationError) -> List[str]:
    messages = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"]) or "<root>"
        messages.append(f"{path}: {item['msg']}")
    return messages


def validate_model(model: type, data: Mapping[str, Any], prefix: str = "") -> BaseModel:
    """
    Validate ``data`` against a pydantic model.

    Raises:
        ConfigError: One message per failing field, prefixed with ``prefix``.
    """
    try:
        return model.model_validate(dict(data))
    except ValidationError as exc:
        messages = _format_errors(exc)
        if prefix:
            messages = [f"{prefix}.{message}" for message in messages]
        raise ConfigError(messages) from exc


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
    """
    Build the run configuration.

    Precedence, lowest first: built-in defaults, the ``CPMG_OUTPUT_DIR``
    environment variable (output directory only), the config file, then
    ``overrides`` (CLI flags; ``None`` values are ignored).

    Args:
        path: Optional YAML or JSON config file.
        overrides: Values that win over everything else.

    Returns:
        Validated RunConfig.

    Raises:
        ConfigError: Unreadable file or invalid values.
    """
    from src.utils.helpers import FileManager

    data: Dict[str, Any] = {}
    env_dir = os.environ.get(OUTPUT_DIR_ENV)
    if env_dir:
        data["output_dir"] = env_dir

    if path is not None:
        try:
            data.update(FileManager.load_yaml(path))
        except (OSError, yaml.YAMLError, TypeError) as exc:
            raise ConfigError([f"{path}: {exc}"]) from exc
        logger.info("Loaded configuration from %s", path)

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    return validate_model(RunConfig, data)


__all__ = [
    "OUTPUT_DIR_ENV",
    "DEFAULT_OUTPUT_DIR",
    "WaveformConfig",
    "ProfileConfig",
    "TimingConfig",
    "SweepAxisConfig",
    "SweepConfig",
    "RunConfig",
    "validate_model",
    "load_config",
]
