"""Perimeter geometry, dispatch events and schedule realizations.

The perimeter has circumference 1 with the base at x = 0. A patroller leaves the base,
completes exactly one lap in its direction of travel and never turns around, so it passes
every point exactly once per lap.
"""

import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Iterable, Sequence

import numpy as np

from src.config import settings
from src.errors import (
    HorizonTooShortError,
    InvalidParamsError,
    InvalidSpeedProfileError,
    WindowExceedsHorizonError,
)

FRACTION_TOLERANCE = 1e-9


class Direction(str, Enum):
    CLOCKWISE = "clockwise"
    COUNTERCLOCKWISE = "counterclockwise"


class PatrollerTag(IntEnum):
    """Provenance label carried by each dispatch."""
    PLAIN = 0
    BLUE = 1
    RED = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class PerimeterPoint:
    """A position on the unit-circumference perimeter."""
    x: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.x < 1.0):
            raise InvalidParamsError(f"Perimeter position must lie in [0, 1), got {self.x}")

    def arc_from_base(self, direction: Direction) -> float:
        """Arc length travelled from the base to this point."""
        if direction is Direction.CLOCKWISE or self.x == 0.0:
            return self.x
        return 1.0 - self.x


@dataclass(frozen=True)
class SpeedProfile:
    """Piecewise-constant speed along one lap.

    Attributes:
        segments: Ordered (arc fraction, speed) pairs along the direction of travel.
            Fractions sum to 1 and every speed is strictly positive.
    """
    segments: tuple[tuple[float, float], ...] = ((1.0, 1.0),)

    def __post_init__(self):
        if not self.segments:
            raise InvalidSpeedProfileError("Speed profile needs at least one segment")
        segments = tuple((float(fraction), float(speed)) for fraction, speed in self.segments)
        for fraction, speed in segments:
            if not (fraction > 0 and math.isfinite(fraction)):
                raise InvalidSpeedProfileError(f"Segment fraction must be > 0, got {fraction}")
            if not (speed > 0 and math.isfinite(speed)):
                # a zero or negative speed would stall or turn the patroller around
                raise InvalidSpeedProfileError(f"Segment speed must be > 0, got {speed}")
        total = sum(fraction for fraction, _ in segments)
        if abs(total - 1.0) > FRACTION_TOLERANCE:
            raise InvalidSpeedProfileError(f"Segment fractions sum to {total}, expected 1")
        object.__setattr__(self, "segments", segments)

    @classmethod
    def constant(cls, speed: float = 1.0) -> "SpeedProfile":
        return cls(((1.0, speed),))

    @property
    def lap_time(self) -> float:
        return sum(fraction / speed for fraction, speed in self.segments)

    def travel_time(self, arc: float) -> float:
        """Time needed to cover `arc` (in [0, 1]) from the base."""
        elapsed = 0.0
        covered = 0.0
        for fraction, speed in self.segments:
            if arc <= covered + fraction:
                return elapsed + (arc - covered) / speed
            elapsed += fraction / speed
            covered += fraction
        return elapsed


DEFAULT_SPEED = SpeedProfile()


@dataclass(frozen=True)
class DispatchEvent:
    """One patroller's departure from the base."""
    dispatch_time: float
    direction: Direction = Direction.CLOCKWISE
    speed: SpeedProfile = DEFAULT_SPEED
    tag: PatrollerTag = PatrollerTag.PLAIN

    def __post_init__(self):
        if not self.dispatch_time >= 0:
            raise InvalidParamsError(f"dispatch_time must be >= 0, got {self.dispatch_time}")


@dataclass(frozen=True)
class AttackWindow:
    """The half-open interval [start, start + duration) at a perimeter point."""
    point: PerimeterPoint
    start: float
    duration: float

    def __post_init__(self):
        if not self.start >= 0:
            raise InvalidParamsError(f"Attack start must be >= 0, got {self.start}")
        if not self.duration > 0:
            raise InvalidParamsError(f"Attack duration must be > 0, got {self.duration}")

    @property
    def end(self) -> float:
        return self.start + self.duration


def arrival_time(event: DispatchEvent, point: PerimeterPoint) -> float:
    """Time at which the patroller of `event` passes `point` during its lap."""
    arc = point.arc_from_base(event.direction)
    return event.dispatch_time + event.speed.travel_time(arc)


def _travel_offsets(
    profiles: Sequence[SpeedProfile],
    clockwise: np.ndarray,
    profile_index: np.ndarray,
    point: PerimeterPoint,
) -> np.ndarray:
    """Base-to-point travel time of each patroller, shaped like `clockwise`."""
    cw = np.array([p.travel_time(point.arc_from_base(Direction.CLOCKWISE)) for p in profiles])
    ccw = np.array([p.travel_time(point.arc_from_base(Direction.COUNTERCLOCKWISE)) for p in profiles])
    return np.where(clockwise, cw[profile_index], ccw[profile_index])


def _readonly(values, dtype) -> np.ndarray:
    array = np.array(values, dtype=dtype)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class ScheduleRealization:
    """A sampled, time-sorted sequence of dispatches over [0, horizon).

    Events are stored column-wise; `profiles` is the palette that `profile_index` points into.
    """
    horizon: float
    dispatch_times: np.ndarray
    clockwise: np.ndarray
    profile_index: np.ndarray
    tags: np.ndarray
    profiles: tuple[SpeedProfile, ...] = (DEFAULT_SPEED,)
    _max_lap: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        times = _readonly(self.dispatch_times, np.float64)
        n = len(times)
        object.__setattr__(self, "dispatch_times", times)
        object.__setattr__(self, "clockwise", _readonly(self.clockwise, bool))
        object.__setattr__(self, "profile_index", _readonly(self.profile_index, np.int64))
        object.__setattr__(self, "tags", _readonly(self.tags, np.int8))
        object.__setattr__(self, "profiles", tuple(self.profiles))

        if not self.horizon > 0:
            raise InvalidParamsError(f"Horizon must be > 0, got {self.horizon}")
        if not (len(self.clockwise) == len(self.profile_index) == len(self.tags) == n):
            raise InvalidParamsError("Realization columns have different lengths")
        if n:
            if times[0] < 0 or times[-1] >= self.horizon:
                raise InvalidParamsError("Dispatch times must lie in [0, horizon)")
            if np.any(np.diff(times) < 0):
                raise InvalidParamsError("Dispatch times must be sorted nondecreasing")
            if self.profile_index.min() < 0 or self.profile_index.max() >= len(self.profiles):
                raise InvalidParamsError("Profile index outside the speed palette")
        object.__setattr__(self, "_max_lap", max(p.lap_time for p in self.profiles))

    @classmethod
    def from_times(
        cls,
        horizon: float,
        times: Sequence[float] | np.ndarray,
        tags: Sequence[int] | np.ndarray | None = None,
    ) -> "ScheduleRealization":
        """Clockwise, constant unit-speed realization for the given dispatch times."""
        n = len(times)
        return cls(
            horizon=horizon,
            dispatch_times=times,
            clockwise=np.ones(n, dtype=bool),
            profile_index=np.zeros(n, dtype=np.int64),
            tags=np.full(n, PatrollerTag.PLAIN) if tags is None else tags,
        )

    @classmethod
    def from_events(cls, horizon: float, events: Iterable[DispatchEvent]) -> "ScheduleRealization":
        ordered = sorted(events, key=lambda e: e.dispatch_time)
        palette: dict[SpeedProfile, int] = {}
        for event in ordered:
            palette.setdefault(event.speed, len(palette))
        return cls(
            horizon=horizon,
            dispatch_times=[e.dispatch_time for e in ordered],
            clockwise=[e.direction is Direction.CLOCKWISE for e in ordered],
            profile_index=[palette[e.speed] for e in ordered],
            tags=[int(e.tag) for e in ordered],
            profiles=tuple(palette) or (DEFAULT_SPEED,),
        )

    def __len__(self) -> int:
        return len(self.dispatch_times)

    @property
    def events(self) -> list[DispatchEvent]:
        return [
            DispatchEvent(
                dispatch_time=float(time),
                direction=Direction.CLOCKWISE if cw else Direction.COUNTERCLOCKWISE,
                speed=self.profiles[idx],
                tag=PatrollerTag(int(tag)),
            )
            for time, cw, idx, tag in zip(
                self.dispatch_times, self.clockwise, self.profile_index, self.tags
            )
        ]

    @property
    def max_lap_time(self) -> float:
        return self._max_lap

    @property
    def safe_horizon(self) -> float:
        """Latest window end whose passes cannot be truncated by the horizon."""
        return self.horizon - self._max_lap

    def arrival_times(self, point: PerimeterPoint) -> np.ndarray:
        """Arrival time at `point` of every patroller, in dispatch order."""
        return self.dispatch_times + _travel_offsets(self.profiles, self.clockwise, self.profile_index, point)

    def interarrival_gaps(self, point: PerimeterPoint | None = None) -> np.ndarray:
        """Gaps between consecutive passes at `point` (the base by default)."""
        arrivals = np.sort(self.arrival_times(point or PerimeterPoint()))
        return np.diff(arrivals)


@dataclass(frozen=True, eq=False)
class DispatchBatch:
    """Dispatch stretches of many independent realizations, one per row.

    Rows are padded to a common width with infinite dispatch times, and the
    dispatches within a row are not necessarily sorted.
    """
    times: np.ndarray
    clockwise: np.ndarray
    profile_index: np.ndarray
    tags: np.ndarray
    profiles: tuple[SpeedProfile, ...] = (DEFAULT_SPEED,)

    def __post_init__(self):
        shape = self.times.shape
        if len(shape) != 2:
            raise InvalidParamsError(f"Dispatch batch must be two-dimensional, got shape {shape}")
        if not (self.clockwise.shape == self.profile_index.shape == self.tags.shape == shape):
            raise InvalidParamsError("Dispatch batch columns have different shapes")

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def counts(self) -> np.ndarray:
        """Number of real dispatches in each row."""
        return np.count_nonzero(np.isfinite(self.times), axis=1)

    def arrival_times(self, point: PerimeterPoint) -> np.ndarray:
        """Arrival time at `point` of every slot; padding stays infinite."""
        return self.times + _travel_offsets(self.profiles, self.clockwise, self.profile_index, point)

    def rows(self, selector) -> "DispatchBatch":
        return DispatchBatch(
            times=self.times[selector],
            clockwise=self.clockwise[selector],
            profile_index=self.profile_index[selector],
            tags=self.tags[selector],
            profiles=self.profiles,
        )

    def extend(self, other: "DispatchBatch") -> "DispatchBatch":
        """Append the dispatches of `other` to the same rows."""
        if len(other) != len(self):
            raise InvalidParamsError(f"Cannot extend {len(self)} rows with {len(other)}")
        return DispatchBatch(
            times=np.concatenate([self.times, other.times], axis=1),
            clockwise=np.concatenate([self.clockwise, other.clockwise], axis=1),
            profile_index=np.concatenate([self.profile_index, other.profile_index], axis=1),
            tags=np.concatenate([self.tags, other.tags], axis=1),
            profiles=self.profiles,
        )


def passes_in_window(realization: ScheduleRealization, window: AttackWindow) -> np.ndarray:
    """Indices of the patrollers passing during `window`, ordered by arrival."""
    if window.end > realization.safe_horizon:
        raise WindowExceedsHorizonError(
            f"Window ends at {window.end:.6g} but the realization is only safe up to "
            f"{realization.safe_horizon:.6g}; enlarge the horizon"
        )
    arrivals = realization.arrival_times(window.point)
    inside = np.flatnonzero((arrivals >= window.start) & (arrivals < window.end))
    return inside[np.argsort(arrivals[inside], kind="stable")]


def count_passes(realization: ScheduleRealization, window: AttackWindow) -> int:
    """Number of patrollers passing the window's point during the window."""
    return len(passes_in_window(realization, window))


@dataclass(frozen=True)
class RateCapReport:
    """Observed dispatch and pass rates of one realization against a rate cap."""
    horizon: float
    lam: float
    point: float
    dispatches: int
    passes: int
    dispatch_rate: float
    pass_rate: float
    pass_dispatch_ratio: float
    tolerance: float
    violation: bool

    def as_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "lambda": self.lam,
            "point": self.point,
            "dispatches": self.dispatches,
            "passes": self.passes,
            "dispatch_rate": self.dispatch_rate,
            "pass_rate": self.pass_rate,
            "pass_dispatch_ratio": self.pass_dispatch_ratio,
            "tolerance": self.tolerance,
            "violation": self.violation,
        }


def validate_rate_cap(
    realization: ScheduleRealization,
    lam: float,
    point: PerimeterPoint,
    tolerance: float | None = None,
    min_load: float | None = None,
) -> RateCapReport:
    """Compare observed dispatch and pass rates at `point` with the cap `lam`.

    Rates are measured over the safe part of the realization. The pass/dispatch ratio
    follows the patrollers dispatched in that span to the end of the realization and
    counts their passes at `point`. A non-reversing lap passes every point once, so the
    ratio is 1 by construction; it falls below 1 only if a lap started in the span
    could outlast the horizon. The pass rate instead counts passes inside the span,
    whoever made them.

    Raises:
        HorizonTooShortError: If horizon * lam is below `min_load`.
    """
    tolerance = settings.rate_cap_tolerance if tolerance is None else tolerance
    min_load = settings.min_rate_cap_load if min_load is None else min_load
    span = realization.safe_horizon
    if span * lam < min_load:
        raise HorizonTooShortError(
            f"Horizon {span:.6g} gives only {span * lam:.3g} expected dispatches; "
            f"need at least {min_load:g}"
        )

    arrivals = realization.arrival_times(point)
    dispatched = realization.dispatch_times < span

    dispatches = int(np.count_nonzero(dispatched))
    passes = int(np.count_nonzero(arrivals < span))
    lap_passes = int(np.count_nonzero(dispatched & (arrivals < realization.horizon)))
    ratio = lap_passes / dispatches if dispatches else 1.0
    dispatch_rate = dispatches / span

    return RateCapReport(
        horizon=span,
        lam=lam,
        point=point.x,
        dispatches=dispatches,
        passes=passes,
        dispatch_rate=dispatch_rate,
        pass_rate=passes / span,
        pass_dispatch_ratio=ratio,
        tolerance=tolerance,
        violation=dispatch_rate > lam * (1.0 + tolerance),
    )
