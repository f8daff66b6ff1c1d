"""Closed-form detection probability, attacker reward and defender costs."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .model import DefenderStrategy, Distribution, NetworkSpec, Route

DEFAULT_DISCOUNT = 0.99
# p this close to 1 takes the exact p == 1 branch of the geometric sum
_UNIT_P_TOL = 1e-15
_SQRT1_2 = math.sqrt(0.5)


@dataclass(frozen=True)
class EconomicParams:
    """Economics of one game.

    Attributes:
        data_size: Total data available for exfiltration (traffic units).
        inspection_cost: Cost of one alert inspection.
        data_loss_cost: Cost per unit of the undetected-round sum.
        discount: Per-round discount factor for the ongoing inspection cost.
    """

    data_size: float
    inspection_cost: float
    data_loss_cost: float
    discount: float = DEFAULT_DISCOUNT

    def __post_init__(self) -> None:
        if not (math.isfinite(self.data_size) and self.data_size > 0):
            raise ValueError(f"data_size must be > 0, got {self.data_size}")
        if not (math.isfinite(self.inspection_cost) and self.inspection_cost >= 0):
            raise ValueError(f"inspection_cost must be >= 0, got {self.inspection_cost}")
        if not (math.isfinite(self.data_loss_cost) and self.data_loss_cost >= 0):
            raise ValueError(f"data_loss_cost must be >= 0, got {self.data_loss_cost}")
        if not 0.0 < self.discount < 1.0:
            raise ValueError(f"discount must be in (0, 1), got {self.discount}")


def _standardize(distribution: Distribution, x: float) -> float:
    if distribution.family != "normal":
        raise ValueError(f"unsupported distribution family {distribution.family!r}")
    if not math.isfinite(x):
        raise ValueError(f"cdf argument must be finite, got {x}")
    if not distribution.std > 0:
        raise ValueError(f"sigma must be positive, got {distribution.std}")
    return (x - distribution.mean) / distribution.std


def distribution_cdf(distribution: Distribution, x: float) -> float:
    """P(X <= x). Normal uses ``erfc`` so both tails keep full relative precision."""
    z = _standardize(distribution, x)
    return 0.5 * math.erfc(-z * _SQRT1_2)


def distribution_sf(distribution: Distribution, x: float) -> float:
    """P(X > x), computed directly rather than as ``1 - cdf``."""
    z = _standardize(distribution, x)
    return 0.5 * math.erfc(z * _SQRT1_2)


def per_round_undetected(
    route: Route,
    thresholds: DefenderStrategy,
    data_size: float,
    n: int,
    network: NetworkSpec,
) -> float:
    """Probability that a single round of ``data_size / n`` traffic raises no alert on the route."""
    if n < 1:
        raise ValueError(f"duration must be >= 1, got {n}")
    rate = data_size / n
    p = 1.0
    for link_id in route.link_ids:
        link = network.link(link_id)
        p *= distribution_cdf(link.distribution, link.mean + thresholds[link_id] * link.std - rate)
    return p


def geometric_partial_sum(p: float, n: int) -> float:
    """Sum of ``p**i`` for ``i = 1..n``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must be in [0, 1], got {p}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if p == 0.0:
        return 0.0
    if 1.0 - p <= _UNIT_P_TOL:
        return float(n)
    # 1 - p**n via expm1 keeps precision when p**n is close to 1
    return p * -math.expm1(n * math.log(p)) / (1.0 - p)


def attacker_reward(
    route: Route,
    thresholds: DefenderStrategy,
    econ: EconomicParams,
    n: int,
    network: NetworkSpec,
) -> float:
    """Expected amount of data exfiltrated before the first detection."""
    p = per_round_undetected(route, thresholds, econ.data_size, n, network)
    return econ.data_size / n * geometric_partial_sum(p, n)


def defender_base_cost(network: NetworkSpec, thresholds: DefenderStrategy, econ: EconomicParams) -> float:
    """Discounted expected inspection cost of false-positive alerts over all links."""
    rate = 0.0
    for link in network.links:
        level = link.mean + thresholds[link.id] * link.std
        rate += link.multiplicity * distribution_sf(link.distribution, level)
    return econ.inspection_cost * rate / (1.0 - econ.discount)


def data_loss_cost(
    route: Route,
    thresholds: DefenderStrategy,
    econ: EconomicParams,
    n: int,
    network: NetworkSpec,
) -> float:
    """The data-loss part of the defender's total cost."""
    p = per_round_undetected(route, thresholds, econ.data_size, n, network)
    return econ.data_loss_cost * geometric_partial_sum(p, n)


def defender_total_cost(
    route: Route,
    thresholds: DefenderStrategy,
    econ: EconomicParams,
    n: int,
    network: NetworkSpec,
) -> float:
    return defender_base_cost(network, thresholds, econ) + data_loss_cost(route, thresholds, econ, n, network)
