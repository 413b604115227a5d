"""Attacker strategies and the best-response search."""

from .strategies import (
    AttackerKind,
    AttackerStrategy,
    after_kth_pass_attack,
    fixed_time_attack,
    parse_strategy,
    stationary_attack,
    swept_phase_attack,
)
from .search import BestResponseResult, best_response_search, strategy_family

__all__ = [
    "AttackerKind",
    "AttackerStrategy",
    "BestResponseResult",
    "after_kth_pass_attack",
    "best_response_search",
    "fixed_time_attack",
    "parse_strategy",
    "stationary_attack",
    "strategy_family",
    "swept_phase_attack",
]
