"""Monte Carlo engine tests at desk scale with fixed seeds."""

import math
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

from src.analytics import expected_miss, game_value, poisson_count_distribution, poisson_detection
from src.attackers import best_response_search, parse_strategy
from src.engine import compare_strategies, empirical_pass_pmf, estimate_detection
from src.engine.simulation import block_streams, detection_columns, run_replications
from src.engine.stats import chi_square_pvalue, confidence_half_width, paired_difference, z_score
from src.errors import InvalidParamsError
from src.models import CountDistribution, GameParams, PerimeterPoint
from src.schedules import GeneratorKind, ScheduleGenerator, load_schedule_spec

FRACTIONAL = GameParams(lam=1.0, t=3.2, p=0.5)
REPRO_DIR = Path(__file__).resolve().parent.parent / "repro"


def _strategy(spec, cycles=4):
    """Periodic schedules are stationary after any whole number of cycles."""
    return replace(parse_strategy(spec), burn_in_cycles=cycles)


def _generator(kind, params=FRACTIONAL):
    return ScheduleGenerator(GeneratorKind(kind), params)


def test_optimal_stationary_matches_value():
    """Test the optimal schedule against a stationary attacker"""
    result = estimate_detection(_generator("optimal"), _strategy("stationary"), FRACTIONAL, 20_000, 1)
    assert abs(result.estimate - 0.8875) <= 3 * result.standard_error
    assert result.detections_by_tag["plain"] == 0
    assert sum(result.detections_by_tag.values()) == result.detections


def test_optimal_pass_pmf():
    """Test the empirical pass law {3: 0.8, 4: 0.2}"""
    result = estimate_detection(_generator("optimal"), _strategy("stationary"), FRACTIONAL, 20_000, 2)
    assert set(result.pass_counts) <= {3, 4}
    assert chi_square_pvalue(result.pass_counts, CountDistribution({3: 0.8, 4: 0.2})) > 0.001


def test_poisson_stationary():
    """Test Poisson dispatching: detection 1 - exp(-p * lambda * t) and Poisson pass counts"""
    params = GameParams(1.0, 1.6, 0.5)
    result = estimate_detection(_generator("poisson", params), _strategy("stationary"), params, 20_000, 3)
    assert abs(result.estimate - poisson_detection(params)) <= 3 * result.standard_error
    assert result.estimate <= game_value(params) + 3 * result.ci_half_width
    assert chi_square_pvalue(result.pass_counts, poisson_count_distribution(1.6)) > 0.001


@pytest.mark.parametrize("kind", ["optimal", "deterministic", "poisson", "uniform-offset"])
def test_mean_pass_count(kind):
    """Test E[N] = lambda * t under a stationary attacker"""
    result = estimate_detection(_generator(kind), _strategy("stationary"), FRACTIONAL, 10_000, 4)
    assert abs(result.mean_passes() - 3.2) <= 4 * max(result.pass_count_standard_error(), 1e-3)


def test_certain_detection():
    """Test estimate exactly 1 with p = 1 and three passes every time"""
    params = GameParams(1.0, 3.0, 1.0)
    result = estimate_detection(_generator("deterministic", params), _strategy("stationary"), params, 2_000, 5)
    assert result.estimate == 1.0
    assert result.pass_counts == {3: 2_000}
    assert result.ci_half_width > 0


def test_empirical_pmf_deterministic():
    """Test the point mass at m for an integer load"""
    params = GameParams(1.0, 3.0, 0.5)
    law = empirical_pass_pmf(_generator("deterministic", params), _strategy("stationary"), params, 2_000, 6)
    assert law.pmf == {3: 1.0}


def test_detection_decomposes_through_pass_count():
    """Test 1 - E[(1-p)^N] over the empirical pass law against the estimate"""
    result = estimate_detection(_generator("poisson"), _strategy("stationary"), FRACTIONAL, 20_000, 7)
    composed = 1.0 - expected_miss(result.pass_distribution(), FRACTIONAL.p)
    assert abs(composed - result.estimate) <= 3 * result.standard_error


def test_after_pass_exploits_uniform_offset():
    """Test after-pass:1:0 against the uniform-offset lattice"""
    result = estimate_detection(_generator("uniform-offset"), _strategy("after-pass:1:0"), FRACTIONAL, 20_000, 8)
    assert result.pass_counts == {3: 20_000}
    assert abs(result.estimate - 0.875) <= 3 * result.standard_error


def test_after_pass_gains_nothing_against_optimal():
    """Test after-pass:1:0 against the optimal schedule"""
    result = estimate_detection(_generator("optimal"), _strategy("after-pass:1:0"), FRACTIONAL, 20_000, 9)
    assert abs(result.estimate - 0.8875) <= 3 * result.standard_error


def test_determinism():
    """Test identical payloads for identical seeds and replication counts"""
    args = (_generator("optimal"), _strategy("stationary"), FRACTIONAL, 3_000, 10)
    assert estimate_detection(*args).model_dump() == estimate_detection(*args).model_dump()


def test_worker_count_does_not_change_results():
    """Test that worker processes leave outcomes unchanged"""
    args = (_generator("poisson"), _strategy("after-pass:2:0.1"), FRACTIONAL, 1_500, 11)
    single = run_replications(*args, workers=1)
    pooled = run_replications(*args, workers=2)
    assert np.array_equal(single.detected, pooled.detected)
    assert np.array_equal(single.passes, pooled.passes)


def test_outcomes_depend_on_seed_and_index_only():
    """Test that a shorter run reproduces the leading replications of a longer one"""
    generator, strategy = _generator("optimal"), _strategy("after-pass:1:0")
    short = run_replications(generator, strategy, FRACTIONAL, 700, 17)
    long = run_replications(generator, strategy, FRACTIONAL, 2_500, 17)
    assert np.array_equal(short.detected, long.detected[:700])
    assert np.array_equal(short.passes, long.passes[:700])
    assert np.array_equal(short.first_detector, long.first_detector[:700])


def test_block_streams_differ():
    """Test that the streams of one block are independent and seeded"""
    schedule, attack, detect = block_streams(1, 0)
    draws = {schedule.random(), attack.random(), detect.random()}
    assert len(draws) == 3
    assert block_streams(1, 0)[0].random() == block_streams(1, 0)[0].random()
    assert block_streams(1, 0)[0].random() != block_streams(1, 1)[0].random()


def test_detection_columns_cover_typical_counts():
    """Test that the shared uniform width exceeds the largest optimal pass count"""
    assert detection_columns(FRACTIONAL) > FRACTIONAL.m + 1
    assert detection_columns(GameParams(1.0, 0.01, 0.5)) >= 1


def test_replication_throughput():
    """Test that 2 * 10^5 replications of the fractional example take a few seconds"""
    began = time.perf_counter()
    result = estimate_detection(_generator("optimal"), _strategy("stationary", 100), FRACTIONAL, 200_000, 18)
    assert time.perf_counter() - began < 12.0
    assert abs(result.estimate - 0.8875) <= 4 * result.standard_error


def test_invalid_replications():
    """Test InvalidParamsError for zero replications or a negative seed"""
    with pytest.raises(InvalidParamsError):
        run_replications(_generator("optimal"), _strategy("stationary"), FRACTIONAL, 0, 1)
    with pytest.raises(InvalidParamsError):
        run_replications(_generator("optimal"), _strategy("stationary"), FRACTIONAL, 10, -1)


def test_best_response_against_uniform_offset():
    """Test that the after-pass exploit wins against the uniform-offset lattice"""
    family = [_strategy("after-pass:1:0"), _strategy("stationary")]
    search = best_response_search(_generator("uniform-offset"), FRACTIONAL, family, 5_000, 12)
    assert search.strategy.label == "after-pass:1:0"
    assert abs(search.estimate - 0.875) <= 3 * search.worst.standard_error


def test_best_response_against_optimal():
    """Test that no candidate beats the game value against the optimal schedule"""
    family = [_strategy(s) for s in ["stationary", "sweep:0", "sweep:0.5", "after-pass:1:0", "after-pass:2:0.4"]]
    search = best_response_search(_generator("optimal"), FRACTIONAL, family, 5_000, 13)
    for _, result in search.candidates:
        assert result.estimate >= 0.8875 - 3 * result.ci_half_width


def test_compare_ranks_optimal_above_poisson():
    """Test the ranked table and the paired difference"""
    stationary = _strategy("stationary")
    table = compare_strategies(
        [(_generator("poisson"), stationary), (_generator("optimal"), stationary)], FRACTIONAL, 10_000, 14
    )
    assert [row.label for row in table.rows] == ["optimal+stationary", "poisson+stationary"]
    (diff,) = table.differences
    assert diff.first == "poisson+stationary"
    assert abs(diff.difference + (0.8875 - poisson_detection(FRACTIONAL))) <= 4 * diff.standard_error


def test_compare_duplicate_pair_has_zero_gap():
    """Test that shared seeds make a duplicated pair differ by exactly zero"""
    pair = (_generator("poisson"), _strategy("stationary"))
    table = compare_strategies([pair, pair], FRACTIONAL, 2_000, 15)
    assert table.differences[0].difference == 0.0
    assert table.differences[0].ci_half_width == 0.0


def test_half_width_interior_and_boundary():
    """Test the normal half-width and the Wilson value at 0 or n successes"""
    z = z_score(0.95)
    assert z == pytest.approx(1.959964, abs=1e-6)
    assert confidence_half_width(50, 100, 0.95) == pytest.approx(z * math.sqrt(0.25 / 100))
    assert confidence_half_width(0, 100, 0.95) == pytest.approx(z * z / (2 * (100 + z * z)))
    assert confidence_half_width(100, 100, 0.95) == confidence_half_width(0, 100, 0.95)


def test_half_width_shrinks_with_root_n():
    """Test the replications^(-1/2) rate between 10^4 and 10^6"""
    ratio = confidence_half_width(5_000, 10_000, 0.95) / confidence_half_width(500_000, 1_000_000, 0.95)
    assert ratio == pytest.approx(10.0)


def test_paired_difference_identical():
    """Test a zero difference for identical outcomes"""
    outcomes = np.array([True, False, True, True])
    assert paired_difference(outcomes, outcomes, 0.95) == (0.0, 0.0, 0.0)


def test_chi_square_outside_support():
    """Test p = 0 when an observed count has no mass"""
    assert chi_square_pvalue({5: 10}, CountDistribution({3: 0.8, 4: 0.2})) == 0.0


def test_uniform_offset_against_blind_attacker():
    """Test that a stationary attacker who cannot see patrollers gets the game value"""
    result = estimate_detection(_generator("uniform-offset"), _strategy("stationary"), FRACTIONAL, 20_000, 16)
    assert abs(result.estimate - 0.8875) <= 3 * result.standard_error


def test_compare_after_pass_gap_under_common_numbers():
    """Test that shared detection draws resolve the 0.0125 gap between lattice and optimal"""
    strategy = _strategy("after-pass:1:0")
    table = compare_strategies(
        [(_generator("uniform-offset"), strategy), (_generator("optimal"), strategy)], FRACTIONAL, 20_000, 19
    )
    (diff,) = table.differences
    assert diff.first == "uniform-offset+after-pass:1:0"
    assert diff.second == "optimal+after-pass:1:0"
    assert diff.difference < -3 * diff.ci_half_width
    assert abs(diff.difference + 0.0125) <= 4 * diff.standard_error


def test_compare_poisson_gap_under_common_numbers():
    """Test that Poisson dispatching trails the optimal schedule by a resolved margin"""
    stationary = _strategy("stationary")
    table = compare_strategies(
        [(_generator("poisson"), stationary), (_generator("optimal"), stationary)], FRACTIONAL, 20_000, 20
    )
    (diff,) = table.differences
    assert diff.first == "poisson+stationary"
    assert diff.difference < -3 * diff.ci_half_width


def test_mixed_routing_stationary_mean_passes():
    """Test E[N] = lambda * t at x = 0.3 under mixed directions and random piecewise speeds"""
    generator = load_schedule_spec(REPRO_DIR / "specs" / "mixed_routing.json")
    strategy = replace(_strategy("stationary"), point=PerimeterPoint(0.3))
    result = estimate_detection(generator, strategy, generator.params, 20_000, 21)
    assert abs(result.mean_passes() - 3.2) <= 3 * result.pass_count_standard_error()
