"""Seedable Monte Carlo estimates of the analytic detection, reward and alert quantities.

Randomness comes from numpy's SFC64 generator seeded through ``SeedSequence``.
Trials are cut into fixed-size blocks and every block gets its own stream,
keyed by ``(seed, stream id, block index)``, so results do not depend on how
blocks are scheduled.  Draws never depend on thresholds or on which trials are still
alive, which gives common random numbers across threshold settings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analytics import EconomicParams
from .model import DefenderStrategy, NetworkSpec, Route

DEFAULT_BLOCK = 1 << 16

_STREAM_ROUND = 1
_STREAM_ATTACK = 2
_STREAM_BASE = 3


@dataclass(frozen=True)
class SimulationConfig:
    trials: int
    seed: int = 0
    horizon_rounds: int = 1
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")
        if self.horizon_rounds < 1:
            raise ValueError(f"horizon_rounds must be >= 1, got {self.horizon_rounds}")
        if self.block_size < 1:
            raise ValueError(f"block_size must be >= 1, got {self.block_size}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class SimulationReport:
    mean: float
    std_error: float
    trials: int

    def scaled(self, factor: float) -> SimulationReport:
        return SimulationReport(self.mean * factor, self.std_error * abs(factor), self.trials)

    def within(self, value: float, n_se: float = 3.0) -> bool:
        """True when ``value`` lies within ``n_se`` standard errors of the estimate."""
        return abs(self.mean - value) <= n_se * self.std_error


def make_rng(seed: int, stream: int = 0, block: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.SFC64(np.random.SeedSequence(seed, spawn_key=(stream, block))))


def _blocks(config: SimulationConfig):
    for b, start in enumerate(range(0, config.trials, config.block_size)):
        yield b, min(config.block_size, config.trials - start)


class _Accumulator:
    """Order-insensitive mean / standard-error reduction over per-block partial sums."""

    def __init__(self) -> None:
        self.sums: list[float] = []
        self.squares: list[float] = []
        self.count = 0

    def add(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float)
        self.sums.append(float(values.sum()))
        self.squares.append(float(np.square(values).sum()))
        self.count += values.size

    def report(self) -> SimulationReport:
        n = self.count
        mean = math.fsum(self.sums) / n
        if n < 2:
            return SimulationReport(mean, 0.0, n)
        var = max(math.fsum(self.squares) - n * mean * mean, 0.0) / (n - 1)
        return SimulationReport(mean, math.sqrt(var / n), n)


def _route_arrays(route: Route, thresholds: DefenderStrategy, network: NetworkSpec):
    links = [network.link(i) for i in route.link_ids]
    mean = np.array([l.mean for l in links])
    std = np.array([l.std for l in links])
    level = mean + np.array([thresholds[l.id] for l in links]) * std
    return mean, std, level


def simulate_round(
    route: Route,
    thresholds: DefenderStrategy,
    rate: float,
    network: NetworkSpec,
    rng: np.random.Generator,
) -> bool:
    """One round: True if any route link's traffic plus ``rate`` exceeds its alert level."""
    mean, std, level = _route_arrays(route, thresholds, network)
    traffic = mean + std * rng.standard_normal(len(mean))
    return bool(np.any(traffic + rate > level))


def _cut_points(route: Route, thresholds: DefenderStrategy, rate: float, network: NetworkSpec) -> np.ndarray:
    """Standardized traffic level above which each route link alerts while carrying ``rate``.

    ``mean + std * z + rate > mean + T * std`` is the same event as ``z > T - rate / std``.
    """
    links = [network.link(i) for i in route.link_ids]
    return np.array([thresholds[l.id] - rate / l.std for l in links])


def _undetected(rng: np.random.Generator, cuts: np.ndarray, z: np.ndarray, tmp: np.ndarray, out: np.ndarray) -> None:
    """Fill ``out`` with one round's no-alert indicator; ``z`` holds one row of draws per link."""
    rng.standard_normal(out=z)
    np.less_equal(z[0], cuts[0], out=out)
    for k in range(1, len(cuts)):
        np.less_equal(z[k], cuts[k], out=tmp)
        out &= tmp


def simulate_detection(
    route: Route,
    thresholds: DefenderStrategy,
    rate: float,
    network: NetworkSpec,
    config: SimulationConfig,
) -> SimulationReport:
    """Fraction of independent single rounds that raise an alert."""
    cuts = _cut_points(route, thresholds, rate, network)
    acc = _Accumulator()
    for b, size in _blocks(config):
        rng = make_rng(config.seed, _STREAM_ROUND, b)
        z = np.empty((len(cuts), size))
        tmp = np.empty(size, dtype=bool)
        clear = np.empty(size, dtype=bool)
        _undetected(rng, cuts, z, tmp, clear)
        acc.add(~clear)
    return acc.report()


def simulate_attack(
    route: Route,
    thresholds: DefenderStrategy,
    econ: EconomicParams,
    n: int,
    network: NetworkSpec,
    config: SimulationConfig,
) -> SimulationReport:
    """Data exfiltrated per attack: rounds survived before the first alert, times ``D / n``.

    Every round draws for the whole block, dead trials included, so a trial's
    draws never depend on thresholds or on the fate of other trials.
    """
    if n < 1:
        raise ValueError(f"duration must be >= 1, got {n}")
    rate = econ.data_size / n
    cuts = _cut_points(route, thresholds, rate, network)
    acc = _Accumulator()
    for b, size in _blocks(config):
        rng = make_rng(config.seed, _STREAM_ATTACK, b)
        z = np.empty((len(cuts), size))
        tmp = np.empty(size, dtype=bool)
        clear = np.empty(size, dtype=bool)
        alive = np.ones(size, dtype=bool)
        survived = np.zeros(size, dtype=np.int64)
        for _ in range(n):
            _undetected(rng, cuts, z, tmp, clear)
            alive &= clear
            survived += alive
            if not alive.any():
                break
        acc.add(survived * rate)
    return acc.report()


def simulate_base_alerts(
    network: NetworkSpec,
    thresholds: DefenderStrategy,
    config: SimulationConfig,
) -> SimulationReport:
    """Alerts per round without attack traffic; each device pair on a link draws its own sample."""
    links = network.links
    acc = _Accumulator()
    for b, size in _blocks(config):
        rng = make_rng(config.seed, _STREAM_BASE, b)
        alerts = np.zeros(size, dtype=np.int64)
        for _ in range(config.horizon_rounds):
            for link in links:
                level = link.mean + thresholds[link.id] * link.std
                traffic = link.mean + link.std * rng.standard_normal((size, link.multiplicity))
                alerts += np.count_nonzero(traffic > level, axis=1)
        acc.add(alerts / config.horizon_rounds)
    return acc.report()


def simulate_base_cost(
    network: NetworkSpec,
    thresholds: DefenderStrategy,
    econ: EconomicParams,
    config: SimulationConfig,
) -> SimulationReport:
    """Monte Carlo counterpart of the discounted base inspection cost."""
    alerts = simulate_base_alerts(network, thresholds, config)
    return alerts.scaled(econ.inspection_cost / (1.0 - econ.discount))
