"""Game parameters for the patrol game (lambda, t, p)."""

import math
from dataclasses import dataclass

from src.config import settings
from src.errors import InvalidParamsError


@dataclass(frozen=True)
class GameParams:
    """The triple (lambda, t, p) of a patrol game.

    Attributes:
        lam: Long-run dispatch-rate cap (patrollers per unit time).
        t: Attack duration.
        p: Detection probability of each passing patroller.
    """
    lam: float
    t: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise InvalidParamsError(f"lambda must be a finite number > 0, got {self.lam}")
        if not (math.isfinite(self.t) and self.t > 0):
            raise InvalidParamsError(f"t must be a finite number > 0, got {self.t}")
        if not (0 < self.p <= 1):
            raise InvalidParamsError(f"p must lie in (0, 1], got {self.p}")

    @property
    def load(self) -> float:
        """Expected passes per attack, lambda * t.

        Values within `integer_tolerance` of an integer snap to that integer so that
        products like 3.2 * 1.0 never flip the integer branch.
        """
        product = self.lam * self.t
        nearest = round(product)
        if abs(product - nearest) < settings.integer_tolerance:
            return float(nearest)
        return product

    @property
    def m(self) -> int:
        return math.floor(self.load)

    @property
    def r(self) -> float:
        return self.load - self.m

    @property
    def is_integer_load(self) -> bool:
        return self.r == 0.0

    @property
    def delta(self) -> float:
        """Spacing t / (m + 1) between blue dispatches of the optimal schedule."""
        return self.t / (self.m + 1)

    @property
    def miss(self) -> float:
        """Per-pass miss probability 1 - p."""
        return 1.0 - self.p

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "t": self.t, "p": self.p}
