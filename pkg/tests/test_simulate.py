import numpy as np
import pytest

from exfilgame import analytics
from exfilgame.analytics import EconomicParams
from exfilgame.model import DefenderStrategy, enumerate_routes
from exfilgame.simulate import (
    SimulationConfig,
    make_rng,
    simulate_attack,
    simulate_base_alerts,
    simulate_base_cost,
    simulate_detection,
    simulate_round,
)

from conftest import single_link

UPPER_TAIL_2 = 0.022750131948179195


def test_round_limits(table1, desktop_route):
    net = table1.network
    rng = make_rng(1)
    never = DefenderStrategy.uniform(net, 1e6)
    assert not any(simulate_round(desktop_route, never, 0.5, net, rng) for _ in range(200))
    always = DefenderStrategy.uniform(net, 2.0)
    assert all(simulate_round(desktop_route, always, 1e6, net, rng) for _ in range(200))


def test_detection_matches_formula(table1, desktop_route):
    net = table1.network
    d = DefenderStrategy.uniform(net, 2.0)
    rep = simulate_detection(desktop_route, d, 0.5, net, SimulationConfig(200_000, seed=3))
    p = analytics.per_round_undetected(desktop_route, d, 20.0, 40, net)
    assert rep.within(1 - p)


def test_attack_limits(table1, desktop_route):
    net = table1.network
    econ = table1.economics
    cfg = SimulationConfig(5_000, seed=4)
    sure = simulate_attack(desktop_route, DefenderStrategy.uniform(net, 1e6), econ, 40, net, cfg)
    assert sure.mean == pytest.approx(20.0, rel=1e-12) and sure.std_error <= 1e-9
    caught = simulate_attack(desktop_route, DefenderStrategy.uniform(net, -50.0), econ, 40, net, cfg)
    assert caught.mean == 0.0


def test_attack_matches_formula(table1, desktop_route):
    net = table1.network
    econ = table1.economics
    d = DefenderStrategy.uniform(net, 2.0)
    rep = simulate_attack(desktop_route, d, econ, 40, net, SimulationConfig(200_000, seed=5))
    assert rep.within(analytics.attacker_reward(desktop_route, d, econ, 40, net))


def test_base_alert_rates():
    cfg = SimulationConfig(200_000, seed=6)
    one = single_link(mean=3.0, std=0.4)
    d = DefenderStrategy.uniform(one, 2.0)
    rate = simulate_base_alerts(one, d, cfg)
    assert rate.within(UPPER_TAIL_2)
    ten = single_link(mean=3.0, std=0.4, src_mult=10)
    rate10 = simulate_base_alerts(ten, d, cfg)
    assert rate10.within(10 * UPPER_TAIL_2)
    assert simulate_base_alerts(one, DefenderStrategy.uniform(one, 1e6), cfg).mean == 0.0


def test_base_cost_scaling():
    net = single_link()
    d = DefenderStrategy.uniform(net, 2.0)
    econ = EconomicParams(20.0, 100.0, 0.0, 0.9)
    cfg = SimulationConfig(100_000, seed=8, horizon_rounds=3)
    cost = simulate_base_cost(net, d, econ, cfg)
    alerts = simulate_base_alerts(net, d, cfg)
    assert cost.mean == pytest.approx(alerts.mean * 1000.0)
    assert cost.within(analytics.defender_base_cost(net, d, econ))


def test_reproducible_bit_for_bit(table1, desktop_route):
    net = table1.network
    d = DefenderStrategy.uniform(net, 2.2)
    cfg = SimulationConfig(70_000, seed=42, block_size=1 << 14)
    assert simulate_attack(desktop_route, d, table1.economics, 35, net, cfg) == simulate_attack(
        desktop_route, d, table1.economics, 35, net, cfg
    )
    assert simulate_base_alerts(net, d, cfg) == simulate_base_alerts(net, d, cfg)


def test_seed_changes_estimate(table1, desktop_route):
    net = table1.network
    d = DefenderStrategy.uniform(net, 2.0)
    a = simulate_detection(desktop_route, d, 0.5, net, SimulationConfig(10_000, seed=1))
    b = simulate_detection(desktop_route, d, 0.5, net, SimulationConfig(10_000, seed=2))
    assert a.mean != b.mean


def test_monotone_coupling(table1):
    net = table1.network
    routes = enumerate_routes(net)
    for route in routes:
        for seed in range(5):
            counts = []
            for t in (1.8, 2.0, 2.4, 2.8):
                d = DefenderStrategy.uniform(net, t)
                rng = make_rng(seed, 9)
                counts.append(sum(simulate_round(route, d, 0.4, net, rng) for _ in range(300)))
            assert counts == sorted(counts, reverse=True)
        lower = simulate_detection(route, DefenderStrategy.uniform(net, 1.8), 0.4, net, SimulationConfig(30_000))
        higher = simulate_detection(route, DefenderStrategy.uniform(net, 2.6), 0.4, net, SimulationConfig(30_000))
        assert higher.mean <= lower.mean


@pytest.mark.parametrize("kwargs", [{"trials": 0}, {"trials": 5, "horizon_rounds": 0}, {"trials": 5, "seed": -1}, {"trials": 5, "block_size": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        SimulationConfig(**kwargs)


def test_attack_rejects_zero_duration(table1, desktop_route):
    with pytest.raises(ValueError):
        simulate_attack(
            desktop_route, DefenderStrategy.uniform(table1.network, 2.0), table1.economics, 0, table1.network,
            SimulationConfig(10),
        )


def test_block_streams_are_independent():
    a = make_rng(7, 1, 0).standard_normal(4)
    b = make_rng(7, 1, 1).standard_normal(4)
    c = make_rng(7, 2, 0).standard_normal(4)
    assert not np.array_equal(a, b) and not np.array_equal(a, c)
    np.testing.assert_array_equal(a, make_rng(7, 1, 0).standard_normal(4))
