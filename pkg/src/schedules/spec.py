"""Schedule-spec documents: JSON descriptions of defender strategies.

Example document::

    {
      "schema_version": 1,
      "generator": "optimal",
      "lambda": 1.0,
      "t": 3.2,
      "routing": {
        "counterclockwise_fraction": 0.5,
        "random_speeds": {"pieces": 3, "min_speed": 0.5, "max_speed": 2.0, "seed": 7}
      }
    }

The `file` generator declares its own cycle instead of a built-in construction::

    {
      "generator": "file",
      "lambda": 2.0,
      "t": 1.5,
      "pattern": {
        "period": 1.0,
        "dispatches": [
          {"offset": 0.0},
          {"offset": 0.5, "direction": "counterclockwise", "speed": [[0.5, 0.5], [0.5, 1.0]]}
        ]
      }
    }
"""

import json
import logging
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.config import SCHEMA_VERSION
from src.errors import InvalidParamsError, RateCapViolationError, ScheduleSpecError
from src.models.params import GameParams
from src.models.perimeter import Direction, DispatchEvent, SpeedProfile
from src.schedules.generators import DispatchPattern, GeneratorKind, RoutingPolicy, ScheduleGenerator

logger = logging.getLogger(__name__)

RATE_SLACK = 1e-9

Segments = list[tuple[float, float]]


class _Document(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class RandomSpeedsDoc(_Document):
    pieces: int = Field(default=3, ge=1)
    min_speed: float = Field(default=0.5, gt=0)
    max_speed: float = Field(default=2.0, gt=0)
    palette_size: int = Field(default=32, ge=1)
    seed: int = 0

    @model_validator(mode="after")
    def _ordered(self):
        if self.max_speed < self.min_speed:
            raise ValueError("max_speed must be >= min_speed")
        return self


class RoutingDoc(_Document):
    counterclockwise_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    speeds: list[Segments] | None = None
    random_speeds: RandomSpeedsDoc | None = None

    @model_validator(mode="after")
    def _one_palette(self):
        if self.speeds is not None and self.random_speeds is not None:
            raise ValueError("Give either 'speeds' or 'random_speeds', not both")
        return self


class PatternDispatchDoc(_Document):
    offset: float = Field(ge=0.0)
    direction: Direction = Direction.CLOCKWISE
    speed: Segments = [(1.0, 1.0)]


class PatternDoc(_Document):
    period: float = Field(gt=0)
    dispatches: list[PatternDispatchDoc] = Field(min_length=1)


class ScheduleSpecDoc(_Document):
    """Top-level schedule-spec document."""
    schema_version: int = SCHEMA_VERSION
    generator: GeneratorKind
    lam: float = Field(alias="lambda")
    t: float
    p: float = 1.0
    routing: RoutingDoc | None = None
    pattern: PatternDoc | None = None

    @model_validator(mode="after")
    def _pattern_matches_kind(self):
        if self.generator is GeneratorKind.FILE and self.pattern is None:
            raise ValueError("The 'file' generator needs a 'pattern' block")
        if self.generator is not GeneratorKind.FILE and self.pattern is not None:
            raise ValueError(f"Generator '{self.generator.value}' does not take a 'pattern' block")
        return self


def random_speed_palette(doc: RandomSpeedsDoc) -> tuple[SpeedProfile, ...]:
    """Seeded palette of piecewise profiles with Dirichlet segment lengths."""
    rng = np.random.default_rng(doc.seed)
    palette = []
    for _ in range(doc.palette_size):
        fractions = rng.dirichlet(np.ones(doc.pieces))
        speeds = rng.uniform(doc.min_speed, doc.max_speed, size=doc.pieces)
        palette.append(SpeedProfile(tuple(zip(fractions.tolist(), speeds.tolist()))))
    return tuple(palette)


def _routing(doc: RoutingDoc | None) -> RoutingPolicy:
    if doc is None:
        return RoutingPolicy()
    if doc.random_speeds is not None:
        profiles = random_speed_palette(doc.random_speeds)
    elif doc.speeds:
        profiles = tuple(SpeedProfile(tuple(segments)) for segments in doc.speeds)
    else:
        profiles = (SpeedProfile(),)
    return RoutingPolicy(counterclockwise_fraction=doc.counterclockwise_fraction, profiles=profiles)


def _pattern(doc: PatternDoc) -> DispatchPattern:
    return DispatchPattern(
        period=doc.period,
        dispatches=tuple(
            DispatchEvent(
                dispatch_time=d.offset,
                direction=d.direction,
                speed=SpeedProfile(tuple(d.speed)),
            )
            for d in doc.dispatches
        ),
    )


def _read_document(document: str | Path | Mapping[str, Any]) -> Mapping[str, Any]:
    if isinstance(document, Mapping):
        return document
    text = str(document)
    if isinstance(document, str) and text.lstrip().startswith("{"):
        source = "<inline>"
    else:
        path = Path(document)
        if not path.exists():
            raise ScheduleSpecError(f"Schedule spec not found: {path}")
        source = str(path)
        text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScheduleSpecError(f"Malformed JSON in schedule spec {source}: {e}") from e
    if not isinstance(data, dict):
        raise ScheduleSpecError(f"Schedule spec {source} must be a JSON object")
    return data


def load_schedule_spec(
    document: str | Path | Mapping[str, Any],
    enforce_rate_cap: bool = True,
) -> ScheduleGenerator:
    """Parse and validate a schedule-spec document into a generator.

    Args:
        document: Path to a JSON file, inline JSON text, or an already parsed mapping.
        enforce_rate_cap: Reject patterns whose implied dispatch rate exceeds lambda.

    Raises:
        ScheduleSpecError: If the document is malformed or fails schema validation.
        RateCapViolationError: If the declared lambda is below the implied dispatch rate.
        InvalidSpeedProfileError: If a speed profile is invalid.
    """
    data = _read_document(document)
    try:
        doc = ScheduleSpecDoc.model_validate(data)
    except ValidationError as e:
        raise ScheduleSpecError(f"Invalid schedule spec: {e}") from e
    if doc.schema_version != SCHEMA_VERSION:
        raise ScheduleSpecError(
            f"Unsupported schema_version {doc.schema_version}; expected {SCHEMA_VERSION}"
        )

    try:
        params = GameParams(lam=doc.lam, t=doc.t, p=doc.p)
    except InvalidParamsError as e:
        raise ScheduleSpecError(f"Invalid parameters in schedule spec: {e}") from e

    pattern = None
    if doc.pattern is not None:
        try:
            pattern = _pattern(doc.pattern)
        except InvalidParamsError as e:
            raise ScheduleSpecError(f"Invalid dispatch pattern: {e}") from e
        if enforce_rate_cap and pattern.rate > params.lam * (1.0 + RATE_SLACK):
            raise RateCapViolationError(
                f"Pattern dispatches {pattern.rate:.6g} patrollers per unit time "
                f"but the declared cap is lambda={params.lam:.6g}"
            )

    generator = ScheduleGenerator(
        kind=doc.generator,
        params=params,
        routing=_routing(doc.routing),
        pattern=pattern,
    )
    logger.info(
        f"Loaded '{generator.label}' schedule spec: rate {generator.expected_rate:.6g}, "
        f"max lap {generator.max_lap_time:.6g}"
    )
    return generator


def resolve_generator(
    name: str,
    params: GameParams,
    schedule_spec: str | Path | Mapping[str, Any] | None = None,
) -> ScheduleGenerator:
    """Map a CLI generator name to a generator.

    `file` loads `schedule_spec`, which carries its own rate and routing; every other
    name builds the built-in construction at `params` with default routing.

    Raises:
        ScheduleSpecError: If the name is unknown or `file` is used without a spec.
    """
    if name == GeneratorKind.FILE.value:
        if schedule_spec is None:
            raise ScheduleSpecError("Generator 'file' needs a schedule spec document")
        return load_schedule_spec(schedule_spec)
    try:
        kind = GeneratorKind(name)
    except ValueError:
        choices = ", ".join(k.value for k in GeneratorKind)
        raise ScheduleSpecError(f"Unknown generator '{name}'. Available: {choices}") from None
    return ScheduleGenerator(kind=kind, params=params)
