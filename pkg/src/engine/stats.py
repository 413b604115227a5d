"""Statistical helpers: confidence intervals and distribution comparisons."""

import math
from typing import Callable, Mapping

import numpy as np
from scipy import stats

from src.models.distribution import CountDistribution

MIN_EXPECTED_PER_BIN = 5.0


def z_score(level: float) -> float:
    """Two-sided normal quantile for a confidence level such as 0.95."""
    if not (0 < level < 1):
        raise ValueError(f"Confidence level must lie in (0, 1), got {level}")
    return float(stats.norm.ppf(0.5 + level / 2))


def confidence_half_width(successes: int, trials: int, level: float) -> float:
    """Half-width of a binomial confidence interval.

    Normal approximation in the interior; at 0 or `trials` successes the normal interval
    collapses to zero width, so the Wilson half-width is used instead.
    """
    z = z_score(level)
    estimate = successes / trials
    if 0 < successes < trials:
        return z * math.sqrt(estimate * (1.0 - estimate) / trials)
    return z * z / (2.0 * (trials + z * z))


def paired_difference(first: np.ndarray, second: np.ndarray, level: float) -> tuple[float, float, float]:
    """Mean difference of paired outcomes with its standard error and CI half-width."""
    diff = first.astype(float) - second.astype(float)
    mean = float(diff.mean())
    se = float(diff.std(ddof=1) / math.sqrt(len(diff))) if len(diff) > 1 else 0.0
    return mean, se, z_score(level) * se


def ks_distance_exponential(samples: np.ndarray, rate: float) -> float:
    """Kolmogorov-Smirnov distance between `samples` and Exp(rate)."""
    return float(stats.kstest(samples, "expon", args=(0.0, 1.0 / rate)).statistic)


def cdf_distance(
    samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray], points: np.ndarray
) -> float:
    """Largest gap between the empirical distribution of `samples` and `cdf` over `points`.

    For lattice-valued samples, evaluating between lattice points gives the exact
    Kolmogorov-Smirnov distance without tie artefacts.
    """
    ordered = np.sort(samples)
    empirical = np.searchsorted(ordered, points, side="right") / len(ordered)
    return float(np.max(np.abs(empirical - cdf(points))))


def chi_square_pvalue(observed: Mapping[int, int], expected: CountDistribution) -> float:
    """Goodness-of-fit p-value of an observed count histogram against a law.

    Bins with fewer than five expected observations are pooled. Observations outside the
    law's support give p = 0.
    """
    total = sum(observed.values())
    if any(count and expected.probability(n) == 0 for n, count in observed.items()):
        return 0.0

    kept_obs, kept_exp = [], []
    pooled_obs, pooled_exp = 0, 0.0
    for n, mass in expected.pmf.items():
        count = observed.get(n, 0)
        if mass * total >= MIN_EXPECTED_PER_BIN:
            kept_obs.append(count)
            kept_exp.append(mass * total)
        else:
            pooled_obs += count
            pooled_exp += mass * total
    if pooled_exp > 0:
        kept_obs.append(pooled_obs)
        kept_exp.append(pooled_exp)
    if len(kept_obs) < 2:
        return 1.0

    f_exp = np.array(kept_exp)
    f_exp *= total / f_exp.sum()
    return float(stats.chisquare(np.array(kept_obs, dtype=float), f_exp).pvalue)
