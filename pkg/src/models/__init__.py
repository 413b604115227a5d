"""Domain types: game parameters, perimeter geometry and count distributions."""

from .distribution import CountDistribution
from .params import GameParams
from .perimeter import (
    AttackWindow,
    Direction,
    DispatchBatch,
    DispatchEvent,
    PatrollerTag,
    PerimeterPoint,
    RateCapReport,
    ScheduleRealization,
    SpeedProfile,
    arrival_time,
    count_passes,
    passes_in_window,
    validate_rate_cap,
)

__all__ = [
    "AttackWindow",
    "CountDistribution",
    "Direction",
    "DispatchBatch",
    "DispatchEvent",
    "GameParams",
    "PatrollerTag",
    "PerimeterPoint",
    "RateCapReport",
    "ScheduleRealization",
    "SpeedProfile",
    "arrival_time",
    "count_passes",
    "passes_in_window",
    "validate_rate_cap",
]
