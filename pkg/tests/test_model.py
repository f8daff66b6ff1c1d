import dataclasses

import pytest

from exfilgame.model import (
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
    network_automorphisms,
    validate_network,
)

from conftest import single_link


def test_table1_routes(table1):
    routes = enumerate_routes(table1.network)
    assert [r.link_ids for r in routes] == [
        ("internal-desktops", "desktops-remote"),
        ("internal-external", "external-remote"),
    ]
    assert routes[0].nodes(table1.network) == ["internal", "desktops", "remote"]
    assert routes[1].describe(table1.network) == "internal->external->remote"


def test_table1_strategy_space_sizes(table1):
    attacker, defender = build_strategy_spaces(table1.network, table1.durations)
    assert len(table1.durations) == 26
    assert len(attacker) == 2 * 26
    assert len(defender) == 6**4
    # route-major rows, odometer columns (last link varies fastest)
    assert attacker[0] == AttackerStrategy(0, 1)
    assert attacker[26] == AttackerStrategy(1, 1)
    assert defender[0].values == (1.8, 1.8, 1.8, 1.8)
    assert defender[1].values == (1.8, 1.8, 1.8, 2.0)
    assert defender[-1].values == (2.8, 2.8, 2.8, 2.8)


def test_capacity_error(table1):
    with pytest.raises(CapacityError, match="1296 defender strategies exceeds cap 1000"):
        build_strategy_spaces(table1.network, table1.durations, max_defender_strategies=1000)


@pytest.mark.parametrize("durations", [[], [0, 1], [5, 5], [10, 5]])
def test_bad_durations(table1, durations):
    with pytest.raises(ValueError):
        build_strategy_spaces(table1.network, durations)


def test_single_link_space():
    net = single_link(thresholds=(1.0, 2.0, 3.0))
    attacker, defender = build_strategy_spaces(net, [1, 2])
    assert len(attacker) == 2 and len(defender) == 3


def _mutate_link(network, index, **changes):
    links = list(network.links)
    links[index] = dataclasses.replace(links[index], **changes)
    return NetworkSpec(network.nodes, tuple(links))


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"distribution": Distribution(5.0, -1.0)}, "non-positive sigma"),
        ({"distribution": Distribution(5.0, 0.0)}, "non-positive sigma"),
        ({"distribution": Distribution(5.0, 1.0, "lognormal")}, "unknown distribution family"),
        ({"allowed_thresholds": ()}, "empty threshold list"),
        ({"allowed_thresholds": (2.0, 1.0)}, "strictly increasing"),
        ({"allowed_thresholds": (1.0, float("nan"))}, "non-finite"),
        ({"src_multiplicity": 0}, "multiplicity"),
        ({"dest": "nowhere"}, "dangling endpoint"),
        ({"dest": "desktops"}, "src equals dest"),
    ],
)
def test_link_errors_name_the_link(table1, changes, message):
    bad = _mutate_link(table1.network, 2, **changes)
    with pytest.raises(NetworkError, match=message) as info:
        validate_network(bad)
    assert info.value.element == "desktops-remote"


def test_duplicate_and_role_errors(table1):
    net = table1.network
    dup = NetworkSpec(net.nodes + (NodeSpec("remote", "sink"),), net.links)
    with pytest.raises(NetworkError, match="duplicate id"):
        validate_network(dup)
    bad_role = NetworkSpec((NodeSpec("internal", "server"),) + net.nodes[1:], net.links)
    with pytest.raises(NetworkError, match="unknown node role"):
        validate_network(bad_role)


def test_no_route():
    nodes = (NodeSpec("a", "source"), NodeSpec("b", "internal"), NodeSpec("c", "sink"))
    link = LinkSpec("a-b", "a", "b", Distribution(1.0, 1.0), (2.0,))
    with pytest.raises(NetworkError, match="no route source→sink"):
        validate_network(NetworkSpec(nodes, (link,)))
    no_sink = (NodeSpec("a", "source"), NodeSpec("b", "internal"))
    with pytest.raises(NetworkError, match="no sink"):
        validate_network(NetworkSpec(no_sink, (link,)))


def test_cycle_does_not_loop():
    nodes = (NodeSpec("s", "source"), NodeSpec("a"), NodeSpec("b"), NodeSpec("t", "sink"))
    d = Distribution(1.0, 1.0)
    links = (
        LinkSpec("s-a", "s", "a", d, (2.0,)),
        LinkSpec("a-b", "a", "b", d, (2.0,)),
        LinkSpec("b-a", "b", "a", d, (2.0,)),
        LinkSpec("b-t", "b", "t", d, (2.0,)),
    )
    routes = enumerate_routes(validate_network(NetworkSpec(nodes, links)))
    assert [r.link_ids for r in routes] == [("s-a", "a-b", "b-t")]


def test_defender_strategy_access(table1):
    d = DefenderStrategy.from_mapping(table1.network, {lid: 2.0 for lid in table1.network.link_ids})
    assert d == DefenderStrategy.uniform(table1.network, 2.0)
    assert d["external-remote"] == 2.0
    with pytest.raises(NetworkError):
        d["missing"]
    with pytest.raises(ValueError):
        DefenderStrategy(("a", "b"), (1.0,))


def test_route_and_attacker_invariants():
    with pytest.raises(ValueError):
        Route(())
    with pytest.raises(ValueError):
        AttackerStrategy(0, 0)
    assert AttackerStrategy(1, 40).label() == "r1/n40"


def test_automorphisms(table1):
    assert network_automorphisms(table1.network) == []
    from exfilgame.scenario import load_scenario

    sym = load_scenario("variance_symmetric").network
    maps = network_automorphisms(sym)
    assert maps == [
        {
            "internal-desktops": "internal-external",
            "internal-external": "internal-desktops",
            "desktops-remote": "external-remote",
            "external-remote": "desktops-remote",
        }
    ]
