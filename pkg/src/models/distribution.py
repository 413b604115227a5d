"""Probability mass functions on the nonnegative integers."""

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from src.errors import InvalidParamsError

MASS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class CountDistribution:
    """Law of N, the number of passes during an attack.

    Attributes:
        pmf: Mapping n -> P{N = n}; zero masses are dropped.
        truncated_mass: Tail mass cut off when the law was built from an infinite one.
    """
    pmf: Mapping[int, float]
    truncated_mass: float = 0.0
    _support: np.ndarray = field(init=False, repr=False, compare=False)
    _masses: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        cleaned = {}
        for n, mass in self.pmf.items():
            if int(n) != n or n < 0:
                raise InvalidParamsError(f"Support points must be nonnegative integers, got {n}")
            if mass < 0:
                raise InvalidParamsError(f"Negative mass {mass} at n={n}")
            if mass > 0:
                cleaned[int(n)] = float(mass)
        total = sum(cleaned.values())
        if abs(total + self.truncated_mass - 1.0) > MASS_TOLERANCE:
            raise InvalidParamsError(f"Masses sum to {total!r}, expected 1")

        support = np.array(sorted(cleaned), dtype=np.int64)
        object.__setattr__(self, "pmf", {int(n): cleaned[int(n)] for n in support})
        object.__setattr__(self, "_support", support)
        object.__setattr__(self, "_masses", np.array([cleaned[int(n)] for n in support]))

    @classmethod
    def point_mass(cls, n: int) -> "CountDistribution":
        return cls({n: 1.0})

    @classmethod
    def from_counts(cls, counts: Mapping[int, int]) -> "CountDistribution":
        """Empirical law from a histogram of observed counts."""
        total = sum(counts.values())
        if total <= 0:
            raise InvalidParamsError("Cannot build an empirical law from zero observations")
        return cls({n: c / total for n, c in counts.items()})

    @property
    def support(self) -> np.ndarray:
        return self._support

    @property
    def masses(self) -> np.ndarray:
        return self._masses

    def mean(self) -> float:
        return float(np.dot(self._support, self._masses))

    def probability(self, n: int) -> float:
        return self.pmf.get(n, 0.0)

    def as_dict(self) -> dict[str, float]:
        # JSON object keys must be strings
        return {str(n): mass for n, mass in self.pmf.items()}
