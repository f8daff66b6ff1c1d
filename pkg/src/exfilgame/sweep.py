"""Experiment families: threshold/duration characterization and equilibrium parameter sweeps."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from . import analytics
from .model import DefenderStrategy, Distribution, Route, enumerate_routes
from .scenario import Scenario
from .solver import MixedEquilibrium, ScenarioSolution, solve_scenario

TOP_DEFENDER = 3


@dataclass(frozen=True)
class CharacterizationRow:
    threshold: float
    duration: int
    p_undetected: float
    attacker_reward: float
    defender_cost: float


@dataclass(frozen=True)
class SweepRow:
    """Summary of one equilibrium at one value of the swept parameter."""

    parameter: str
    value: float
    attacker_reward: float
    defender_cost: float
    route_weights: tuple[float, ...]
    modal_duration: int
    top_defender: tuple[tuple[DefenderStrategy, float], ...]
    epsilon: float
    equilibria: int = 1


def route_weights(solution: ScenarioSolution, eq: MixedEquilibrium) -> tuple[float, ...]:
    weights = np.zeros(len(solution.matrices.routes))
    for p, strat in zip(eq.attacker_mix, solution.matrices.row_labels):
        weights[strat.route_index] += p
    return tuple(float(w) for w in weights)


def modal_duration(solution: ScenarioSolution, eq: MixedEquilibrium) -> int:
    """Duration carrying the most attacker probability, summed over routes; shortest wins ties."""
    mass: dict[int, float] = {}
    for p, strat in zip(eq.attacker_mix, solution.matrices.row_labels):
        mass[strat.duration] = mass.get(strat.duration, 0.0) + float(p)
    top = max(mass.values())
    return min(n for n, w in mass.items() if w >= top - 1e-12)


def summarize(
    solution: ScenarioSolution,
    parameter: str,
    value: float,
    eq: MixedEquilibrium | None = None,
    top: int = TOP_DEFENDER,
) -> SweepRow:
    eq = solution.canonical if eq is None else eq
    order = np.argsort(-eq.defender_mix, kind="stable")[:top]
    cols = solution.matrices.col_labels
    defenders = tuple((cols[j], float(eq.defender_mix[j])) for j in order if eq.defender_mix[j] > 0)
    return SweepRow(
        parameter,
        float(value),
        eq.attacker_value,
        eq.defender_cost_value,
        route_weights(solution, eq),
        modal_duration(solution, eq),
        defenders,
        eq.epsilon,
        len(solution.equilibria),
    )


def characterize(
    scenario: Scenario,
    thresholds: Sequence[float],
    durations: Sequence[int] | None = None,
    route: Route | int = 0,
) -> list[CharacterizationRow]:
    """Closed-form quantities for one fixed route with the same threshold on every link.

    No strategic interaction: one row per (threshold, duration) pair.
    """
    network = scenario.network
    if isinstance(route, int):
        route = enumerate_routes(network)[route]
    econ = scenario.economics
    rows = []
    for t in thresholds:
        defense = DefenderStrategy.uniform(network, t)
        base = analytics.defender_base_cost(network, defense, econ)
        for n in scenario.durations if durations is None else durations:
            p = analytics.per_round_undetected(route, defense, econ.data_size, n, network)
            s = analytics.geometric_partial_sum(p, n)
            rows.append(
                CharacterizationRow(float(t), int(n), p, econ.data_size / n * s, base + econ.data_loss_cost * s)
            )
    return rows


def _solve_point(args) -> ScenarioSolution:
    scenario, labels = args
    return solve_scenario(scenario.network, scenario.economics, scenario.durations, labels=labels)


def _run(points: list[Scenario], labels, workers: int) -> list[ScenarioSolution]:
    jobs = [(s, labels) for s in points]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_solve_point, jobs))
    return [_solve_point(j) for j in jobs]


def sweep_data_size(
    scenario: Scenario,
    values: Sequence[float],
    labels: Iterable[int] | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Canonical equilibrium for each data size, everything else fixed."""
    values = [float(v) for v in values]
    if any(v <= 0 for v in values):
        raise ValueError("data sizes must be positive")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError("data sizes must be strictly increasing")
    points = [scenario.with_economics(data_size=v) for v in values]
    labels = None if labels is None else list(labels)
    return [summarize(sol, "data_size", v) for v, sol in zip(values, _run(points, labels, workers))]


def sink_links(scenario: Scenario) -> list[str]:
    """Links that end at a sink node, in declaration order."""
    roles = {n.id: n.role for n in scenario.network.nodes}
    return [l.id for l in scenario.network.links if roles[l.dest] == "sink"]


def with_sigma(scenario: Scenario, link_ids: Iterable[str], sigma: float) -> Scenario:
    network = scenario.network
    for lid in link_ids:
        link = network.link(lid)
        network = network.replace_link(replace(link, distribution=Distribution(link.mean, sigma, link.distribution.family)))
    return scenario.with_network(network)


def sweep_variance(
    scenario: Scenario,
    sigmas: Sequence[float],
    mode: str = "symmetric",
    link_id: str | None = None,
    labels: Iterable[int] | None = None,
    workers: int = 1,
) -> list[SweepRow]:
    """Canonical equilibrium as link standard deviations change.

    ``symmetric`` sets every sink-facing link to the same sigma; ``single``
    changes only ``link_id`` (default: the last sink-facing link).
    """
    sigmas = [float(s) for s in sigmas]
    if any(not s > 0 for s in sigmas):
        raise ValueError("sigma values must be positive")
    right = sink_links(scenario)
    if mode == "symmetric":
        targets = right
        parameter = "sigma"
    elif mode == "single":
        targets = [link_id or right[-1]]
        scenario.network.link(targets[0])
        parameter = f"sigma[{targets[0]}]"
    else:
        raise ValueError(f"unknown variance sweep mode {mode!r}")
    points = [with_sigma(scenario, targets, s) for s in sigmas]
    labels = None if labels is None else list(labels)
    return [summarize(sol, parameter, s) for s, sol in zip(sigmas, _run(points, labels, workers))]
