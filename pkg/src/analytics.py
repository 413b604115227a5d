"""Closed-form quantities of the patrol game.

Game value in case and concise form, the two-point minimizer of E[(1-p)^N] for a fixed
mean, miss probabilities of count laws, and a brute-force oracle for the minimizer.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from src.config import settings
from src.errors import FormulaMismatchError, InfeasibleError, InvalidParamsError, NegativeMeanError
from src.models.distribution import CountDistribution
from src.models.params import GameParams

logger = logging.getLogger(__name__)

AGREEMENT_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ValueForms:
    """Both expressions of the game value plus the quantities they are built from."""
    params: GameParams
    case_form: float
    concise_form: float

    @property
    def value(self) -> float:
        return self.case_form

    @property
    def branch(self) -> str:
        return "integer" if self.params.is_integer_load else "fractional"

    def as_dict(self) -> dict:
        return {
            **self.params.as_dict(),
            "value": self.value,
            "m": self.params.m,
            "r": self.params.r,
            "delta": self.params.delta,
            "branch": self.branch,
            "case_form": self.case_form,
            "concise_form": self.concise_form,
        }


def _case_form(params: GameParams) -> float:
    q, m, r = params.miss, params.m, params.r
    if r == 0:
        return 1.0 - q**m
    return 1.0 - r * q ** (m + 1) - (1.0 - r) * q**m


def _concise_form(params: GameParams) -> float:
    load = params.load
    floor, ceil = math.floor(load), math.ceil(load)
    q = params.miss
    return 1.0 - (load - floor) * q**ceil - (1.0 - load + floor) * q**floor


def game_value_forms(params: GameParams) -> ValueForms:
    """Evaluate the game value both ways and check that they agree.

    Raises:
        FormulaMismatchError: If the forms differ by more than 1e-12.
    """
    case, concise = _case_form(params), _concise_form(params)
    if abs(case - concise) > AGREEMENT_TOLERANCE:
        raise FormulaMismatchError(
            f"Case form {case!r} and concise form {concise!r} disagree for {params}"
        )
    return ValueForms(params=params, case_form=case, concise_form=concise)


def game_value(params: GameParams) -> float:
    """Detection probability guaranteed by both players' optimal strategies."""
    return game_value_forms(params).value


def optimal_count_distribution(c: float) -> CountDistribution:
    """Law with mean `c` minimizing E[(1-p)^N] for every p in (0, 1).

    A point mass at `c` when `c` is an integer, otherwise the two integers around `c`
    weighted so that the mean is `c`.

    Raises:
        NegativeMeanError: If c < 0.
    """
    if not c >= 0:
        raise NegativeMeanError(f"Mean pass count must be >= 0, got {c}")
    if float(c).is_integer():
        return CountDistribution.point_mass(int(c))
    lower, upper = math.floor(c), math.ceil(c)
    return CountDistribution({lower: upper - c, upper: c - lower})


def expected_miss(distribution: CountDistribution, p: float) -> float:
    """E[(1-p)^N]: probability that every pass overlooks the attack."""
    if not (0 < p <= 1):
        raise InvalidParamsError(f"p must lie in (0, 1], got {p}")
    # 0.0 ** 0 == 1.0, so N = 0 stays a certain miss at p = 1
    return float(np.dot(distribution.masses, (1.0 - p) ** distribution.support.astype(float)))


def detection_probability(distribution: CountDistribution, p: float) -> float:
    return 1.0 - expected_miss(distribution, p)


def lemma_oracle(c: float, p: float, max_support: int | None = None) -> tuple[float, CountDistribution]:
    """Exact minimum of E[(1-p)^N] over laws on {0..max_support} with mean `c`.

    Minimizing a linear objective under normalization plus one mean constraint attains its
    optimum on at most two support points, so enumerating every pair i <= c <= j is exact.
    Ties keep the pair with the narrowest spread.

    Returns:
        (minimum miss probability, minimizing distribution)

    Raises:
        NegativeMeanError: If c < 0.
        InfeasibleError: If c > max_support.
    """
    max_support = settings.max_support if max_support is None else max_support
    if not c >= 0:
        raise NegativeMeanError(f"Mean pass count must be >= 0, got {c}")
    if c > max_support:
        raise InfeasibleError(f"No law on {{0..{max_support}}} has mean {c}")
    if not (0 < p <= 1):
        raise InvalidParamsError(f"p must lie in (0, 1], got {p}")

    points = np.arange(max_support + 1, dtype=float)
    i = points[:, None]
    j = points[None, :]
    q = 1.0 - p

    with np.errstate(divide="ignore", invalid="ignore"):
        spread = j - i
        upper_weight = np.where(spread > 0, (c - i) / spread, 0.0)
    split = (i <= c) & (j >= c) & (i < j)
    exact = (i == c) & (j == c)
    feasible = split | exact
    upper_weight = np.where(exact, 0.0, upper_weight)

    miss = np.where(feasible, (1.0 - upper_weight) * q**i + upper_weight * q**j, np.inf)
    minimum = float(miss.min())

    ties = np.argwhere(miss <= minimum + 1e-15)
    lo, hi = min(ties, key=lambda ij: (ij[1] - ij[0], ij[0]))
    w = float(upper_weight[lo, hi])
    if lo == hi:
        law = CountDistribution.point_mass(int(lo))
    else:
        law = CountDistribution({int(lo): 1.0 - w, int(hi): w})
    logger.debug(f"Oracle minimum {minimum!r} at support ({lo}, {hi}) for c={c}, p={p}")
    return minimum, law


def poisson_count_distribution(c: float, tail_mass: float | None = None) -> CountDistribution:
    """Poisson(c) truncated where the remaining tail mass drops below `tail_mass`."""
    tail_mass = settings.poisson_tail_mass if tail_mass is None else tail_mass
    if not c >= 0:
        raise NegativeMeanError(f"Poisson mean must be >= 0, got {c}")
    if c == 0:
        return CountDistribution.point_mass(0)

    limit = int(c + 20 * math.sqrt(c) + 50)
    ns = np.arange(limit + 1)
    tails = stats.poisson.sf(ns, c)
    cutoff = int(np.argmax(tails < tail_mass))
    masses = stats.poisson.pmf(ns[: cutoff + 1], c)
    return CountDistribution(
        {int(n): float(mass) for n, mass in enumerate(masses)},
        truncated_mass=float(tails[cutoff]),
    )


def poisson_detection(params: GameParams) -> float:
    """Detection probability when patrollers leave as a Poisson process at rate lambda."""
    return 1.0 - math.exp(-params.p * params.lam * params.t)


@dataclass(frozen=True)
class GapLaw:
    """Law of the time between consecutive realized patrollers when lambda * t < 1."""
    step: float
    success: float

    def mean(self) -> float:
        return self.step / self.success

    def cdf(self, x: float | np.ndarray) -> np.ndarray:
        # sampled gaps are differences of rounded slot times, so allow a sliver below each slot
        slots = np.floor(np.asarray(x, dtype=float) / self.step + 1e-6)
        return np.where(slots >= 1, 1.0 - (1.0 - self.success) ** slots, 0.0)


def optimal_gap_law(params: GameParams) -> GapLaw:
    """t times a Geometric(lambda * t) variable, for the optimal schedule with m = 0."""
    if params.m != 0:
        raise InvalidParamsError(f"Gap law is geometric only when lambda * t < 1, got {params.load}")
    return GapLaw(step=params.t, success=params.r)
