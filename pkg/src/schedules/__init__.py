"""Defender strategies: schedule generators and schedule-spec documents."""

from .generators import (
    DEFAULT_ROUTING,
    DispatchPattern,
    GeneratorKind,
    RoutingPolicy,
    ScheduleGenerator,
    sample_deterministic,
    sample_optimal,
    sample_pattern,
    sample_poisson,
    sample_uniform_offset,
)
from .spec import load_schedule_spec, resolve_generator

__all__ = [
    "DEFAULT_ROUTING",
    "DispatchPattern",
    "GeneratorKind",
    "RoutingPolicy",
    "ScheduleGenerator",
    "load_schedule_spec",
    "resolve_generator",
    "sample_deterministic",
    "sample_optimal",
    "sample_pattern",
    "sample_poisson",
    "sample_uniform_offset",
]
