import json
import logging

import pytest

from exfilgame.scenario import (
    BUILTIN_SCENARIOS,
    ScenarioError,
    ScenarioValidationError,
    dumps_scenario,
    load_scenario,
    loads_scenario,
    scenario_from_dict,
    scenario_to_dict,
)

MINIMAL = {
    "network": {
        "nodes": [{"id": "a", "role": "source"}, {"id": "b", "role": "sink"}],
        "links": [{"id": "a-b", "src": "a", "dest": "b", "distribution": {"mean": 5, "std": 0.5}, "thresholds": [2.0]}],
    },
    "economics": {"data_size": 20, "inspection_cost": 100, "data_loss_cost": 1000},
    "durations": [10],
}


def doc(**changes):
    d = json.loads(json.dumps(MINIMAL))
    for path, value in changes.items():
        target = d
        keys = path.split(".")
        for k in keys[:-1]:
            target = target[int(k)] if k.isdigit() else target[k]
        target[keys[-1]] = value
    return d


def test_table1_verbatim(table1):
    e = table1.economics
    assert (e.data_size, e.inspection_cost, e.data_loss_cost, e.discount) == (20.0, 100.0, 100000.0, 0.99)
    params = {l.id: (l.mean, l.std) for l in table1.network.links}
    assert params == {
        "internal-desktops": (5.0, 0.5),
        "internal-external": (15.0, 2.5),
        "desktops-remote": (5.0, 0.2),
        "external-remote": (10.0, 0.25),
    }
    assert all(l.allowed_thresholds == (1.8, 2.0, 2.2, 2.4, 2.6, 2.8) for l in table1.network.links)
    assert table1.durations[:6] == (1, 10, 20, 35, 40, 50) and table1.durations[-1] == 350


@pytest.mark.parametrize("name", BUILTIN_SCENARIOS)
def test_round_trip(name):
    s = load_scenario(name)
    again = loads_scenario(dumps_scenario(s))
    assert again == s
    assert scenario_to_dict(again) == scenario_to_dict(s)


def test_defaults_are_logged(caplog):
    with caplog.at_level(logging.INFO, logger="exfilgame.scenario"):
        s = scenario_from_dict(doc())
    assert s.economics.discount == 0.99
    assert s.network.links[0].src_multiplicity == 1
    text = caplog.text
    assert "discount not given" in text and "src_multiplicity not given" in text


def test_default_thresholds():
    d = doc()
    del d["network"]["links"][0]["thresholds"]
    d["network"]["default_thresholds"] = [1.0, 2.0]
    assert scenario_from_dict(d).network.links[0].allowed_thresholds == (1.0, 2.0)
    del d["network"]["default_thresholds"]
    with pytest.raises(ScenarioError, match="thresholds"):
        scenario_from_dict(d)


def test_negative_sigma_names_link():
    with pytest.raises(ScenarioValidationError, match=r"network\.links\[0\].*non-positive sigma"):
        scenario_from_dict(doc(**{"network.links.0.distribution": {"mean": 5, "std": -1}}))


def test_unknown_family():
    with pytest.raises(ScenarioValidationError, match="unknown distribution family"):
        scenario_from_dict(doc(**{"network.links.0.distribution": {"family": "pareto", "mean": 5, "std": 1}}))


@pytest.mark.parametrize(
    "changes, message",
    [
        ({"extra": 1}, "unknown field 'extra'"),
        ({"economics.datasize": 3}, "unknown field 'datasize'"),
        ({"durations": "10"}, "expected list"),
        ({"durations": [10.5]}, "expected an integer"),
        ({"economics.data_size": True}, "expected a number"),
        ({"network.nodes": {}}, "expected list"),
    ],
)
def test_strict_parse(changes, message):
    with pytest.raises(ScenarioError, match=message):
        scenario_from_dict(doc(**changes))


@pytest.mark.parametrize(
    "changes",
    [{"durations": []}, {"durations": [10, 5]}, {"durations": [0]}, {"economics.discount": 1.0}, {"economics.data_size": -2}],
)
def test_validation_errors(changes):
    with pytest.raises(ScenarioValidationError):
        scenario_from_dict(doc(**changes))


def test_json_error_position():
    with pytest.raises(ScenarioError, match="line 2 column"):
        loads_scenario('{\n  "network": ,\n}')


def test_missing_file(tmp_path):
    with pytest.raises(ScenarioError, match="cannot read"):
        load_scenario(tmp_path / "absent.json")


def test_load_from_path(tmp_path):
    path = tmp_path / "s.json"
    path.write_text(json.dumps(MINIMAL))
    assert load_scenario(path).durations == (10,)
