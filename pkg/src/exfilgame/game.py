"""Bimatrix payoff assembly and best-response queries."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import analytics
from .analytics import EconomicParams
from .model import (
    AttackerStrategy,
    DefenderStrategy,
    NetworkSpec,
    Route,
    enumerate_routes,
    network_automorphisms,
)

_PROB_TOL = 1e-9


@dataclass(frozen=True)
class PayoffMatrices:
    """Attacker reward (maximized) and defender cost (minimized), attacker on rows.

    Both matrices are read-only after construction.
    """

    attacker_reward: np.ndarray
    defender_cost: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()
    routes: tuple[Route, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        a = np.array(self.attacker_reward, dtype=float)
        c = np.array(self.defender_cost, dtype=float)
        if a.ndim != 2 or a.shape != c.shape:
            raise ValueError(f"payoff shapes differ or are not 2-D: {a.shape} vs {c.shape}")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(c))):
            raise ValueError("payoff matrices must be finite")
        a.setflags(write=False)
        c.setflags(write=False)
        rows = tuple(self.row_labels) or tuple(range(a.shape[0]))
        cols = tuple(self.col_labels) or tuple(range(a.shape[1]))
        if len(rows) != a.shape[0] or len(cols) != a.shape[1]:
            raise ValueError("label counts must match matrix shape")
        object.__setattr__(self, "attacker_reward", a)
        object.__setattr__(self, "defender_cost", c)
        object.__setattr__(self, "row_labels", rows)
        object.__setattr__(self, "col_labels", cols)
        object.__setattr__(self, "routes", tuple(self.routes))

    @property
    def shape(self) -> tuple[int, int]:
        return self.attacker_reward.shape


def build_payoffs(
    network: NetworkSpec,
    econ: EconomicParams,
    attacker_space: Sequence[AttackerStrategy],
    defender_space: Sequence[DefenderStrategy],
) -> PayoffMatrices:
    """Evaluate attacker reward and defender total cost for every strategy pair.

    The route-dependent terms only see thresholds on the route's own links, so
    they are evaluated once per distinct on-route threshold tuple and reused.
    Reused values come from the very same analytics call, so each cell is
    bit-identical to a fresh per-cell evaluation.
    """
    routes = enumerate_routes(network)
    m, n = len(attacker_space), len(defender_space)
    reward = np.empty((m, n))
    cost = np.empty((m, n))
    base = np.array([analytics.defender_base_cost(network, d, econ) for d in defender_space])
    positions = {lid: k for k, lid in enumerate(network.link_ids)}

    for i, strat in enumerate(attacker_space):
        route = routes[strat.route_index]
        idx = [positions[lid] for lid in route.link_ids]
        cache: dict[tuple[float, ...], tuple[float, float]] = {}
        for j, d in enumerate(defender_space):
            key = tuple(d.values[k] for k in idx)
            hit = cache.get(key)
            if hit is None:
                p = analytics.per_round_undetected(route, d, econ.data_size, strat.duration, network)
                s = analytics.geometric_partial_sum(p, strat.duration)
                hit = cache[key] = (econ.data_size / strat.duration * s, econ.data_loss_cost * s)
            reward[i, j] = hit[0]
            cost[i, j] = base[j] + hit[1]
    return PayoffMatrices(reward, cost, tuple(attacker_space), tuple(defender_space), tuple(routes))


def _check_mix(mix, size: int, what: str) -> np.ndarray:
    mix = np.asarray(mix, dtype=float)
    if mix.shape != (size,):
        raise ValueError(f"{what} mixture has shape {mix.shape}, expected ({size},)")
    if np.any(mix < -_PROB_TOL) or abs(mix.sum() - 1.0) > _PROB_TOL:
        raise ValueError(f"{what} mixture must be a probability vector")
    return mix


def best_response_attacker(matrices: PayoffMatrices, defender_mixed) -> tuple[int, float]:
    """Row maximizing expected reward against the defender mixture; lowest index wins ties."""
    y = _check_mix(defender_mixed, matrices.shape[1], "defender")
    values = matrices.attacker_reward @ y
    i = int(np.argmax(values))
    return i, float(values[i])


def best_response_defender(matrices: PayoffMatrices, attacker_mixed) -> tuple[int, float]:
    """Column minimizing expected cost against the attacker mixture; lowest index wins ties."""
    x = _check_mix(attacker_mixed, matrices.shape[0], "attacker")
    values = x @ matrices.defender_cost
    j = int(np.argmin(values))
    return j, float(values[j])


def strategy_symmetries(network: NetworkSpec, matrices: PayoffMatrices) -> list[tuple[np.ndarray, np.ndarray]]:
    """Row and column permutations induced by network automorphisms.

    Only permutations under which both matrices are invariant (to rounding)
    are returned; an empty list means no usable symmetry.
    """
    routes = list(matrices.routes) or enumerate_routes(network)
    route_pos = {r.link_ids: k for k, r in enumerate(routes)}
    row_pos = {(s.route_index, s.duration): i for i, s in enumerate(matrices.row_labels)}
    col_pos = {d.values: j for j, d in enumerate(matrices.col_labels)}
    link_pos = {lid: k for k, lid in enumerate(network.link_ids)}
    out = []
    for mapping in network_automorphisms(network):
        try:
            route_img = [route_pos[tuple(mapping[l] for l in r.link_ids)] for r in routes]
            rows = np.array([row_pos[(route_img[s.route_index], s.duration)] for s in matrices.row_labels])
            cols = []
            for d in matrices.col_labels:
                values = [0.0] * len(d.values)
                for lid, v in zip(d.link_ids, d.values):
                    values[link_pos[mapping[lid]]] = v
                cols.append(col_pos[tuple(values)])
            cols = np.array(cols)
        except (KeyError, AttributeError):
            continue
        a, c = matrices.attacker_reward, matrices.defender_cost
        if np.allclose(a[np.ix_(rows, cols)], a, rtol=1e-12, atol=0) and np.allclose(
            c[np.ix_(rows, cols)], c, rtol=1e-12, atol=0
        ):
            out.append((rows, cols))
    return out
