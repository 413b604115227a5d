"""Experiment configs: the documents behind simulate, best-response and repro runs."""

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator
from pydantic import ValidationError as PydanticValidationError

from src.attackers.search import DEFAULT_FAMILY, strategy_family
from src.attackers.strategies import AttackerStrategy, parse_strategy
from src.config import SCHEMA_VERSION, settings
from src.errors import InvalidParamsError
from src.models.params import GameParams
from src.models.perimeter import PerimeterPoint
from src.schedules.generators import ScheduleGenerator
from src.schedules.spec import resolve_generator

# Fields that change wall-clock time or destination but never the payload
RUNTIME_FIELDS = {"workers", "output"}

# Repro checks that draw their own random parameters
ANALYTIC_CHECKS = {"value_forms", "lemma_oracle"}

Check = Literal[
    "estimate", "mean_passes", "pass_pmf", "paired_gap", "rate_cap",
    "gap_ks", "value_forms", "lemma_oracle", "rerun",
]


class ExperimentConfig(BaseModel):
    """A fully specified Monte Carlo experiment."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    schema_version: int = SCHEMA_VERSION
    name: str | None = None
    command: Literal["simulate", "best-response"] = "simulate"
    lam: float | None = Field(default=None, alias="lambda")
    t: float | None = None
    p: float | None = None
    generator: str = "optimal"
    schedule_spec: str | dict[str, Any] | None = None
    strategy: str = "stationary"
    family: list[str] = Field(default_factory=lambda: list(DEFAULT_FAMILY))
    replications: int = Field(default_factory=lambda: settings.replications, ge=1)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0)
    workers: int = Field(default_factory=lambda: settings.workers, ge=1)
    horizon: float | None = Field(default=None, gt=0)
    point: float = Field(default_factory=lambda: settings.attack_point, ge=0.0, lt=1.0)
    expected: float | None = None
    check: Check = "estimate"
    sigmas: float = Field(default=3.0, gt=0)
    pairs: list[str] = Field(default_factory=list)
    min_pvalue: float = Field(default=0.01, gt=0, lt=1)
    max_distance: float | None = Field(default=None, gt=0)
    samples: int | None = Field(default=None, ge=1)
    tolerance: float | None = Field(default=None, gt=0)
    max_seconds: float | None = Field(default=None, gt=0)
    output: str | None = None
    format: Literal["csv", "json"] = "json"

    @model_validator(mode="after")
    def _require_game(self) -> "ExperimentConfig":
        if self.check not in ANALYTIC_CHECKS and None in (self.lam, self.t, self.p):
            raise ValueError("lambda, t and p are required")
        if self.check == "paired_gap" and len(self.pairs) != 2:
            raise ValueError("paired_gap needs exactly two pairs")
        return self

    def game_params(self) -> GameParams:
        if None in (self.lam, self.t, self.p):
            raise InvalidParamsError(f"Config {self.name or self.check} does not set lambda, t and p")
        return GameParams(lam=self.lam, t=self.t, p=self.p)

    def payload_dict(self) -> dict:
        """Resolved config as echoed into payloads."""
        return self.model_dump(mode="json", by_alias=True, exclude=RUNTIME_FIELDS)


@dataclass(frozen=True)
class ResolvedExperiment:
    config: ExperimentConfig
    params: GameParams
    generator: ScheduleGenerator
    point: PerimeterPoint

    def burn_in_cycles(self) -> int:
        if self.config.horizon is None:
            return settings.burn_in_cycles
        return max(1, math.ceil(self.config.horizon / self.generator.period))

    def strategy(self, spec: str | None = None) -> AttackerStrategy:
        strategy = parse_strategy(spec or self.config.strategy, self.point)
        return _with_burn_in(strategy, self.burn_in_cycles())

    def family(self) -> list[AttackerStrategy]:
        return [
            _with_burn_in(s, self.burn_in_cycles())
            for s in strategy_family(self.params, self.config.family, self.point)
        ]


def _with_burn_in(strategy: AttackerStrategy, cycles: int) -> AttackerStrategy:
    return replace(strategy, burn_in_cycles=cycles)


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read an experiment config, anchoring a relative schedule_spec path at the file."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise InvalidParamsError(f"Malformed JSON in experiment config {path}: {e}") from e
    if not isinstance(data, dict):
        raise InvalidParamsError(f"Experiment config {path} must be a JSON object")
    spec = data.get("schedule_spec")
    if isinstance(spec, str) and not Path(spec).is_absolute():
        data["schedule_spec"] = str((path.parent / spec).resolve())
    return data


def build_config(base: dict[str, Any] | None = None, **overrides: Any) -> ExperimentConfig:
    """Merge flag overrides (None means unset) into a config document and validate it."""
    data = dict(base or {})
    for key, value in overrides.items():
        if value is not None:
            data["lambda" if key == "lam" else key] = value
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as e:
        raise InvalidParamsError(f"Invalid experiment config: {e}") from e


def resolve(config: ExperimentConfig) -> ResolvedExperiment:
    """Turn a validated config into library objects; raises the library's own errors."""
    params = config.game_params()
    generator = resolve_generator(config.generator, params, config.schedule_spec)
    return ResolvedExperiment(
        config=config,
        params=params,
        generator=generator,
        point=PerimeterPoint(config.point),
    )
