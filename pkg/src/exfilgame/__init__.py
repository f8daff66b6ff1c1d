"""Game-theoretic model of network data exfiltration against threshold-based detection."""

from .analytics import (
    EconomicParams,
    attacker_reward,
    defender_base_cost,
    defender_total_cost,
    distribution_cdf,
    geometric_partial_sum,
    per_round_undetected,
)
from .model import (
    AttackerStrategy,
    CapacityError,
    DefenderStrategy,
    Distribution,
    LinkSpec,
    NetworkError,
    NetworkSpec,
    NodeSpec,
    Route,
    build_strategy_spaces,
    enumerate_routes,
    validate_network,
)

__version__ = "0.1.0"
