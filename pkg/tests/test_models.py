"""Unit tests for game parameters, count laws and perimeter geometry."""

import numpy as np
import pytest

from src.errors import (
    HorizonTooShortError,
    InvalidParamsError,
    InvalidSpeedProfileError,
    WindowExceedsHorizonError,
)
from src.models import (
    AttackWindow,
    CountDistribution,
    Direction,
    DispatchEvent,
    GameParams,
    PatrollerTag,
    PerimeterPoint,
    ScheduleRealization,
    SpeedProfile,
    arrival_time,
    count_passes,
    validate_rate_cap,
)
from src.schedules import RoutingPolicy, sample_deterministic, sample_optimal, sample_poisson
from src.schedules.spec import RandomSpeedsDoc, random_speed_palette


def test_params_fractional_load():
    """Test m, r and delta for lambda * t = 3.2"""
    params = GameParams(lam=1.0, t=3.2, p=0.5)
    assert params.m == 3
    assert params.r == pytest.approx(0.2)
    assert params.delta == pytest.approx(0.8)
    assert not params.is_integer_load


def test_params_snap_to_integer_load():
    """Test that 0.1 * 30 is treated as the integer 3"""
    params = GameParams(lam=0.1, t=30.0, p=0.5)
    assert params.m == 3
    assert params.r == 0.0
    assert params.is_integer_load


@pytest.mark.parametrize("lam,t,p", [(0.0, 1.0, 0.5), (1.0, -1.0, 0.5), (1.0, 1.0, 0.0), (1.0, 1.0, 1.5)])
def test_params_rejected(lam, t, p):
    """Test InvalidParamsError for out-of-range parameters"""
    with pytest.raises(InvalidParamsError):
        GameParams(lam=lam, t=t, p=p)


def test_distribution_drops_zero_masses():
    """Test that zero masses vanish from the support"""
    law = CountDistribution({0: 0.0, 3: 0.8, 4: 0.2})
    assert list(law.support) == [3, 4]
    assert law.mean() == pytest.approx(3.2)
    assert law.probability(0) == 0.0


def test_distribution_rejects_bad_mass():
    """Test masses that do not sum to one"""
    with pytest.raises(InvalidParamsError):
        CountDistribution({1: 0.5, 2: 0.4})
    with pytest.raises(InvalidParamsError):
        CountDistribution({1: 1.5, 2: -0.5})


def test_arrival_clockwise():
    """Test clockwise arrival at x = 0.25"""
    assert arrival_time(DispatchEvent(2.0), PerimeterPoint(0.25)) == pytest.approx(2.25)


def test_arrival_counterclockwise():
    """Test counterclockwise arrival covers the arc 1 - x"""
    event = DispatchEvent(2.0, direction=Direction.COUNTERCLOCKWISE)
    assert arrival_time(event, PerimeterPoint(0.25)) == pytest.approx(2.75)


def test_arrival_piecewise_speed():
    """Test integration through a two-piece speed profile"""
    profile = SpeedProfile(((0.5, 0.5), (0.5, 1.0)))
    assert profile.lap_time == pytest.approx(1.5)
    assert arrival_time(DispatchEvent(0.0, speed=profile), PerimeterPoint(0.75)) == pytest.approx(1.25)


def test_arrival_at_base_is_dispatch_time():
    """Test that both directions reach x = 0 at the dispatch time"""
    for direction in Direction:
        assert arrival_time(DispatchEvent(4.0, direction=direction), PerimeterPoint(0.0)) == 4.0


def test_arrival_increases_along_direction():
    """Test that arrivals are strictly increasing along the lap"""
    profile = SpeedProfile(((0.2, 2.0), (0.5, 0.7), (0.3, 1.3)))
    xs = np.linspace(0.01, 0.99, 50)
    cw = [arrival_time(DispatchEvent(1.0, speed=profile), PerimeterPoint(x)) for x in xs]
    ccw = [
        arrival_time(DispatchEvent(1.0, Direction.COUNTERCLOCKWISE, profile), PerimeterPoint(x))
        for x in xs
    ]
    assert np.all(np.diff(cw) > 0)
    assert np.all(np.diff(ccw) < 0)


@pytest.mark.parametrize("segments", [((1.0, 0.0),), ((1.0, -1.0),), ((0.5, 1.0), (0.4, 1.0)), ()])
def test_invalid_speed_profile(segments):
    """Test InvalidSpeedProfileError for stalled, reversing or incomplete laps"""
    with pytest.raises(InvalidSpeedProfileError):
        SpeedProfile(segments)


def test_count_passes_deterministic_lattice():
    """Test exactly three passes for lambda * t = 3 wherever the window starts"""
    realization = sample_deterministic(1.0, 30.0)
    for start in [5.0, 5.5, 7.25, 12.999]:
        window = AttackWindow(PerimeterPoint(0.3), start, 3.0)
        assert count_passes(realization, window) == 3


def test_count_passes_half_open():
    """Test that a pass at the window start counts and one at the end does not"""
    realization = ScheduleRealization.from_times(20.0, [2.0, 5.0])
    assert count_passes(realization, AttackWindow(PerimeterPoint(), 2.0, 3.0)) == 1
    assert count_passes(realization, AttackWindow(PerimeterPoint(), 1.0, 1.0)) == 0


def test_count_passes_empty_schedule():
    """Test that an empty schedule never passes"""
    realization = ScheduleRealization.from_times(10.0, [])
    assert count_passes(realization, AttackWindow(PerimeterPoint(0.5), 1.0, 3.0)) == 0


def test_window_exceeds_horizon():
    """Test WindowExceedsHorizonError when a lap could be truncated"""
    realization = ScheduleRealization.from_times(10.0, [0.0, 1.0])
    with pytest.raises(WindowExceedsHorizonError):
        count_passes(realization, AttackWindow(PerimeterPoint(), 8.5, 1.0))


def test_count_passes_additive():
    """Test that adjacent half-open windows add up"""
    rng = np.random.default_rng(3)
    realization = sample_poisson(2.0, 200.0, rng)
    point = PerimeterPoint(0.4)
    for _ in range(200):
        s, t1, t2 = rng.uniform(0, 90), rng.uniform(0.1, 5), rng.uniform(0.1, 5)
        whole = count_passes(realization, AttackWindow(point, s, t1 + t2))
        first = count_passes(realization, AttackWindow(point, s, t1))
        second = count_passes(realization, AttackWindow(point, s + t1, t2))
        assert whole == first + second


def test_count_passes_point_shift():
    """Test that moving the point shifts the counts by the travel time at constant speed"""
    rng = np.random.default_rng(4)
    realization = sample_poisson(1.0, 200.0, rng)
    for _ in range(100):
        s, x = rng.uniform(0, 150), rng.uniform(0, 0.99)
        at_base = count_passes(realization, AttackWindow(PerimeterPoint(0.0), s, 3.2))
        shifted = count_passes(realization, AttackWindow(PerimeterPoint(x), s + x, 3.2))
        assert at_base == shifted


def test_realization_from_events_sorted():
    """Test that events are sorted and keep their tags and directions"""
    events = [
        DispatchEvent(3.0, tag=PatrollerTag.RED),
        DispatchEvent(1.0, Direction.COUNTERCLOCKWISE, tag=PatrollerTag.BLUE),
    ]
    realization = ScheduleRealization.from_events(5.0, events)
    assert list(realization.dispatch_times) == [1.0, 3.0]
    assert realization.events[0].direction is Direction.COUNTERCLOCKWISE
    assert realization.events[1].tag is PatrollerTag.RED


def test_realization_rejects_events_past_horizon():
    """Test that dispatch times must lie below the horizon"""
    with pytest.raises(InvalidParamsError):
        ScheduleRealization.from_times(5.0, [1.0, 5.0])


def test_rate_cap_poisson():
    """Test pass rate near lambda and a pass/dispatch ratio of exactly one"""
    rng = np.random.default_rng(11)
    realization = sample_poisson(1.0, 10_001.0, rng)
    report = validate_rate_cap(realization, 1.0, PerimeterPoint(0.37))
    assert report.pass_dispatch_ratio == 1.0
    assert report.pass_rate == pytest.approx(1.0, abs=0.05)
    assert not report.violation


def test_rate_cap_ratio_follows_dispatched_laps():
    """Test that laps straddling the span end count toward the ratio but not the pass rate"""
    slow = SpeedProfile.constant(0.5)
    events = [DispatchEvent(float(d), speed=slow) for d in range(10)]
    realization = ScheduleRealization.from_events(12.0, events)
    report = validate_rate_cap(realization, 1.0, PerimeterPoint(0.5), min_load=0.0)
    assert report.horizon == pytest.approx(10.0)
    assert report.dispatches == 10
    # arrivals at 1, 2, ..., 10; the last one falls on the span end
    assert report.passes == 9
    assert report.pass_dispatch_ratio == 1.0
    assert report.pass_rate < report.dispatch_rate


def test_rate_cap_mixed_routing():
    """Test that mixed directions and speeds keep the per-point pass rate at the dispatch rate"""
    palette = random_speed_palette(RandomSpeedsDoc(pieces=3, min_speed=0.5, max_speed=2.0, seed=5))
    routing = RoutingPolicy(counterclockwise_fraction=0.5, profiles=palette)
    params = GameParams(lam=1.0, t=3.2, p=0.5)
    rng = np.random.default_rng(12)
    realization = sample_optimal(params, 10_000.0 + routing.max_lap_time, rng, routing)
    report = validate_rate_cap(realization, 1.0, PerimeterPoint(0.3))
    assert report.pass_dispatch_ratio == 1.0
    assert report.pass_rate == pytest.approx(report.dispatch_rate, rel=0.02)
    assert not report.violation


def test_rate_cap_violation():
    """Test that dispatching at twice the cap is flagged"""
    realization = sample_deterministic(2.0, 1001.0)
    report = validate_rate_cap(realization, 1.0, PerimeterPoint(0.5))
    assert report.violation
    assert report.dispatch_rate == pytest.approx(2.0, rel=0.01)


def test_rate_cap_horizon_too_short():
    """Test HorizonTooShortError below the minimum expected dispatch count"""
    realization = sample_deterministic(1.0, 50.0)
    with pytest.raises(HorizonTooShortError):
        validate_rate_cap(realization, 1.0, PerimeterPoint(0.5))
