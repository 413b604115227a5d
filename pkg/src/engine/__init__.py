"""Monte Carlo engine and statistical utilities."""

from .compare import ComparisonTable, compare_strategies
from .simulation import SimulationResult, empirical_pass_pmf, estimate_detection

__all__ = [
    "ComparisonTable",
    "SimulationResult",
    "compare_strategies",
    "empirical_pass_pmf",
    "estimate_detection",
]
