"""Attacker strategies: rules that turn an observed pass history into an attack window.

Strategies never look ahead: a start time chosen at instant s depends only on passes
observed before s.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.config import settings
from src.errors import InsufficientPassesError, InvalidParamsError, StrategySpecError
from src.models.params import GameParams
from src.models.perimeter import AttackWindow, PerimeterPoint, ScheduleRealization
from src.schedules.generators import ScheduleGenerator


# Relative lag of an after-pass attack behind the pass it reacts to. It exceeds the
# rounding error of boundary-coincident dispatch times yet never reaches the next pass.
IMMEDIATELY_AFTER = 1e-9


class AttackerKind(str, Enum):
    FIXED_TIME = "fixed"
    STATIONARY = "stationary"
    AFTER_KTH_PASS = "after-pass"
    SWEPT_PHASE = "sweep"


def _default_point() -> PerimeterPoint:
    return PerimeterPoint(settings.attack_point)


def fixed_time_attack(start: float, params: GameParams, point: PerimeterPoint | None = None) -> AttackWindow:
    """Attack over [start, start + t) regardless of what has been observed."""
    return AttackWindow(point=point or _default_point(), start=start, duration=params.t)


def stationary_attack(
    burn_in: float,
    period: float,
    params: GameParams,
    rng: np.random.Generator,
    point: PerimeterPoint | None = None,
) -> AttackWindow:
    """Attack at a uniformly random phase of one cycle once the patrol is in steady state.

    For schedules that repeat every `period` this start law is exactly the time-stationary
    one, so the expected pass count is lambda * t.
    """
    start = burn_in + rng.random() * period
    return AttackWindow(point=point or _default_point(), start=start, duration=params.t)


def swept_phase_attack(
    phase: float,
    burn_in: float,
    period: float,
    params: GameParams,
    point: PerimeterPoint | None = None,
) -> AttackWindow:
    """Attack at a fixed fraction `phase` of the cycle after the burn-in."""
    start = burn_in + phase * period
    return AttackWindow(point=point or _default_point(), start=start, duration=params.t)


def after_kth_pass_attack(
    k: int,
    delay: float,
    realization: ScheduleRealization,
    rng: np.random.Generator,
    burn_in: float,
    period: float,
    params: GameParams,
    point: PerimeterPoint | None = None,
) -> AttackWindow:
    """Watch from a random phase after the burn-in and attack right after the k-th pass.

    The window opens immediately after the instant a_k + delay, where a_k is the k-th
    pass observed from the watch origin: a patroller passing exactly at that instant is
    already behind the attacker, while one passing exactly t later is still caught.

    Raises:
        InsufficientPassesError: If fewer than k passes are observed, or the resulting
            window does not fit in the safe part of the realization.
    """
    point = point or _default_point()
    origin = burn_in + rng.random() * period
    arrivals = realization.arrival_times(point)
    observed = np.sort(arrivals[arrivals >= origin])
    if len(observed) < k:
        raise InsufficientPassesError(
            f"Only {len(observed)} passes observed after t={origin:.6g}; need {k}"
        )
    instant = observed[k - 1] + delay
    start = instant + IMMEDIATELY_AFTER * max(1.0, instant)
    if start + params.t > realization.safe_horizon:
        raise InsufficientPassesError(
            f"Attack after pass {k} would end at {start + params.t:.6g}, past the safe "
            f"horizon {realization.safe_horizon:.6g}"
        )
    return AttackWindow(point=point, start=start, duration=params.t)


@dataclass(frozen=True)
class AttackerStrategy:
    """One attacker decision rule with its parameters.

    Attributes:
        kind: Which rule to apply.
        start: Start time of a fixed-time attack.
        k: Pass index an after-pass attacker waits for.
        delay: Extra wait after the k-th pass.
        phase: Cycle fraction of a swept-phase attack, in [0, 1).
        point: Attack point on the perimeter.
        burn_in_cycles: Cycles of the schedule to let pass before the attacker engages.
    """
    kind: AttackerKind
    start: float = 0.0
    k: int = 1
    delay: float = 0.0
    phase: float = 0.0
    point: PerimeterPoint = field(default_factory=_default_point)
    burn_in_cycles: int = field(default_factory=lambda: settings.burn_in_cycles)

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackerKind(self.kind))
        if self.start < 0:
            raise InvalidParamsError(f"Attack start must be >= 0, got {self.start}")
        if self.k < 1:
            raise InvalidParamsError(f"Pass index k must be >= 1, got {self.k}")
        if self.delay < 0:
            raise InvalidParamsError(f"Delay must be >= 0, got {self.delay}")
        if not (0.0 <= self.phase < 1.0):
            raise InvalidParamsError(f"Phase must lie in [0, 1), got {self.phase}")
        if self.burn_in_cycles < 0:
            raise InvalidParamsError(f"burn_in_cycles must be >= 0, got {self.burn_in_cycles}")

    @property
    def label(self) -> str:
        match self.kind:
            case AttackerKind.FIXED_TIME:
                return f"fixed:{self.start:.10g}"
            case AttackerKind.STATIONARY:
                return "stationary"
            case AttackerKind.AFTER_KTH_PASS:
                return f"after-pass:{self.k}:{self.delay:.10g}"
            case AttackerKind.SWEPT_PHASE:
                return f"sweep:{self.phase:.10g}"

    def burn_in(self, generator: ScheduleGenerator) -> float:
        return self.burn_in_cycles * generator.period

    @property
    def is_reactive(self) -> bool:
        """Whether the start depends on observed passes."""
        return self.kind is AttackerKind.AFTER_KTH_PASS

    def watch_span(self, generator: ScheduleGenerator) -> float:
        """Observation time that normally covers k passes, plus the delay."""
        return (self.k + 6 * math.sqrt(self.k) + 6) / generator.expected_rate + self.delay

    def required_horizon(self, generator: ScheduleGenerator, params: GameParams) -> float:
        """Horizon to sample so that this strategy's window normally fits.

        After-pass attackers may still need more when passes are sparse; callers retry
        with a longer horizon on InsufficientPassesError.
        """
        if self.kind is AttackerKind.FIXED_TIME:
            return generator.horizon_for(self.start + params.t)
        latest_origin = self.burn_in(generator) + generator.period
        if self.is_reactive:
            latest_origin += self.watch_span(generator)
        return generator.horizon_for(latest_origin + params.t)

    def anchors(self, generator: ScheduleGenerator, size: int, rng: np.random.Generator) -> np.ndarray:
        """Attack starts of `size` replications, or watch origins for after-pass attackers.

        Draws follow the single-window rules: one uniform phase per replication for
        stationary and after-pass attackers, none for fixed and swept ones.
        """
        match self.kind:
            case AttackerKind.FIXED_TIME:
                return np.full(size, self.start)
            case AttackerKind.SWEPT_PHASE:
                return np.full(size, self.burn_in(generator) + self.phase * generator.period)
            case _:
                return self.burn_in(generator) + rng.random(size) * generator.period

    def reach(self, generator: ScheduleGenerator, params: GameParams) -> float:
        """How far past its anchor a replication's dispatch stretch must normally run."""
        if self.is_reactive:
            return self.watch_span(generator) + params.t
        return params.t

    def after_pass_starts(
        self,
        arrivals: np.ndarray,
        origins: np.ndarray,
        limits: np.ndarray,
        params: GameParams,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Row-wise `after_kth_pass_attack` over padded arrival times.

        Args:
            arrivals: Arrival times at the attack point, one row per replication.
            origins: Watch origin of each row.
            limits: Latest window end each row's arrivals are complete up to.

        Returns:
            Start times and a mask of rows whose window fits below its limit.
        """
        observed = np.where(arrivals >= origins[:, None], arrivals, np.inf)
        if observed.shape[1] < self.k:
            kth = np.full(len(observed), np.inf)
        else:
            kth = np.partition(observed, self.k - 1, axis=1)[:, self.k - 1]
        instant = kth + self.delay
        starts = instant + IMMEDIATELY_AFTER * np.maximum(1.0, instant)
        return starts, np.isfinite(starts) & (starts + params.t <= limits)

    def window(
        self,
        realization: ScheduleRealization,
        generator: ScheduleGenerator,
        params: GameParams,
        rng: np.random.Generator,
    ) -> AttackWindow:
        """Pick this strategy's attack window against one realization."""
        match self.kind:
            case AttackerKind.FIXED_TIME:
                return fixed_time_attack(self.start, params, self.point)
            case AttackerKind.STATIONARY:
                return stationary_attack(
                    self.burn_in(generator), generator.period, params, rng, self.point
                )
            case AttackerKind.SWEPT_PHASE:
                return swept_phase_attack(
                    self.phase, self.burn_in(generator), generator.period, params, self.point
                )
            case AttackerKind.AFTER_KTH_PASS:
                return after_kth_pass_attack(
                    self.k,
                    self.delay,
                    realization,
                    rng,
                    self.burn_in(generator),
                    generator.period,
                    params,
                    self.point,
                )


def _number(text: str, spec: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise StrategySpecError(f"'{text}' is not a number in strategy '{spec}'") from None
    if not math.isfinite(value):
        raise StrategySpecError(f"Strategy '{spec}' needs finite numbers")
    return value


def parse_strategy(spec: str, point: PerimeterPoint | None = None) -> AttackerStrategy:
    """Parse a single-strategy string.

    Accepted forms: `fixed:<s>`, `stationary`, `after-pass:<k>:<delay>`, `sweep:<phase>`.

    Raises:
        StrategySpecError: If the string is malformed or names a strategy family.
    """
    point = point or _default_point()
    name, *args = spec.strip().split(":")
    try:
        match name, len(args):
            case "stationary", 0:
                return AttackerStrategy(AttackerKind.STATIONARY, point=point)
            case "fixed", 1:
                return AttackerStrategy(AttackerKind.FIXED_TIME, start=_number(args[0], spec), point=point)
            case "after-pass", 2:
                k = _number(args[0], spec)
                if not k.is_integer():
                    raise StrategySpecError(f"Pass index must be an integer in '{spec}'")
                return AttackerStrategy(
                    AttackerKind.AFTER_KTH_PASS, k=int(k), delay=_number(args[1], spec), point=point
                )
            case "sweep", 1:
                return AttackerStrategy(AttackerKind.SWEPT_PHASE, phase=_number(args[0], spec), point=point)
            case "sweep", 0:
                raise StrategySpecError(
                    "'sweep' names the whole phase grid; use it with best-response or pick 'sweep:<phase>'"
                )
    except InvalidParamsError as e:
        raise StrategySpecError(f"Invalid strategy '{spec}': {e}") from e
    raise StrategySpecError(
        f"Unknown strategy '{spec}'. Expected fixed:<s>, stationary, after-pass:<k>:<delay> or sweep:<phase>"
    )
