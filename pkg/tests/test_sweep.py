import dataclasses

import pytest

from exfilgame import analytics
from exfilgame.model import DefenderStrategy, enumerate_routes
from exfilgame.scenario import load_scenario
from exfilgame.solver import solve_scenario, verify_equilibrium
from exfilgame.sweep import (
    characterize,
    modal_duration,
    route_weights,
    sink_links,
    summarize,
    sweep_data_size,
    sweep_variance,
    with_sigma,
)

SHORT = (10, 40, 80, 155)
LABELS = range(0, 1304, 61)


def short(name):
    return dataclasses.replace(load_scenario(name), durations=SHORT)


def test_characterize_rows_match_analytics(table1, desktop_route):
    rows = characterize(table1, [1.5, 2.0, 3.0], [10, 40], route=0)
    assert [(r.threshold, r.duration) for r in rows] == [(1.5, 10), (1.5, 40), (2.0, 10), (2.0, 40), (3.0, 10), (3.0, 40)]
    net, econ = table1.network, table1.economics
    for r in rows:
        d = DefenderStrategy.uniform(net, r.threshold)
        assert r.p_undetected == analytics.per_round_undetected(desktop_route, d, 20.0, r.duration, net)
        assert r.attacker_reward == analytics.attacker_reward(desktop_route, d, econ, r.duration, net)
        assert r.defender_cost == pytest.approx(analytics.defender_total_cost(desktop_route, d, econ, r.duration, net), rel=1e-15)


def test_characterize_extremes(table1):
    high = characterize(table1, [3.0], table1.durations)
    low = characterize(table1, [1.5], table1.durations)
    mid = characterize(table1, [2.5], table1.durations)
    peak = max(r.attacker_reward for r in high)
    assert 9.0 < peak < 20.0
    assert peak > 3 * max(r.attacker_reward for r in mid)
    assert max(r.attacker_reward for r in low) < 0.02 * table1.economics.data_size


def test_characterize_default_grid(table1):
    rows = characterize(table1, [2.0])
    assert [r.duration for r in rows] == list(table1.durations)


def test_single_point_sweep_matches_solve():
    scen = short("table1")
    (row,) = sweep_data_size(scen, [20.0], labels=LABELS)
    sol = solve_scenario(scen.network, scen.economics, scen.durations, labels=LABELS)
    assert row == summarize(sol, "data_size", 20.0)
    assert verify_equilibrium(sol.matrices, sol.canonical).passed
    assert sum(row.route_weights) == pytest.approx(1.0)
    assert modal_duration(sol, sol.canonical) in SHORT
    assert route_weights(sol, sol.canonical) == row.route_weights


def test_data_size_sweep_keeps_order_and_validates():
    scen = short("table1")
    rows = sweep_data_size(scen, [5.0, 20.0], labels=LABELS)
    assert [r.value for r in rows] == [5.0, 20.0]
    assert rows[0].modal_duration <= rows[1].modal_duration
    with pytest.raises(ValueError):
        sweep_data_size(scen, [20.0, 5.0])
    with pytest.raises(ValueError):
        sweep_data_size(scen, [0.0, 5.0])


def test_variance_modes():
    scen = short("variance_single")
    sym = sweep_variance(scen, [0.25], "symmetric", labels=LABELS)[0]
    single = sweep_variance(scen, [0.25], "single", labels=LABELS)[0]
    assert sym.route_weights == pytest.approx((0.5, 0.5), abs=1e-6)
    assert single.parameter == "sigma[external-remote]"
    routes = enumerate_routes(scen.network)
    external = next(k for k, r in enumerate(routes) if "external-remote" in r.link_ids)
    assert single.route_weights[external] < sym.route_weights[external]
    with pytest.raises(ValueError):
        sweep_variance(scen, [0.0])
    with pytest.raises(ValueError):
        sweep_variance(scen, [1.0], mode="both")


def test_with_sigma_only_touches_targets(table1):
    assert sink_links(table1) == ["desktops-remote", "external-remote"]
    changed = with_sigma(table1, ["external-remote"], 2.0)
    assert changed.network.link("external-remote").std == 2.0
    assert changed.network.link("external-remote").mean == 10.0
    assert changed.network.link("desktops-remote") == table1.network.link("desktops-remote")
