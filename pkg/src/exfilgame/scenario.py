"""Strict JSON scenario files.

Schema (unknown keys are rejected at every level)::

    {
      "name": str,                                 # optional
      "description": str,                          # optional
      "network": {
        "nodes": [{"id": str, "role": "source" | "internal" | "sink"}, ...],
        "links": [{
          "id": str, "src": str, "dest": str,
          "distribution": {"family": "normal", "mean": float, "std": float},
          "thresholds": [float, ...],              # optional if default_thresholds given
          "src_multiplicity": int,                 # default 1
          "dest_multiplicity": int                 # default 1
        }, ...],
        "default_thresholds": [float, ...]         # optional
      },
      "economics": {"data_size": float, "inspection_cost": float,
                    "data_loss_cost": float, "discount": float},   # discount default 0.99
      "durations": [int, ...]
    }
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Any

from .analytics import DEFAULT_DISCOUNT, EconomicParams
from .model import Distribution, LinkSpec, NetworkError, NetworkSpec, NodeSpec, validate_network

log = logging.getLogger(__name__)

BUILTIN_SCENARIOS = ("table1", "variance_symmetric", "variance_single")


class ScenarioError(ValueError):
    """Malformed scenario file: bad JSON, wrong types, or unknown fields."""

    def __init__(self, message: str, path: str = "") -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ScenarioValidationError(ScenarioError):
    """Well-formed scenario whose values break a model invariant."""


@dataclass(frozen=True)
class Scenario:
    network: NetworkSpec
    economics: EconomicParams
    durations: tuple[int, ...]
    name: str = ""
    description: str = ""

    def with_network(self, network: NetworkSpec) -> Scenario:
        return replace(self, network=network)

    def with_economics(self, **changes: float) -> Scenario:
        return replace(self, economics=replace(self.economics, **changes))


def _expect(value: Any, kind, path: str):
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ScenarioError(f"expected a number, got {type(value).__name__}", path)
        value = float(value)
        if not math.isfinite(value):
            raise ScenarioError("number must be finite", path)
        return value
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ScenarioError(f"expected an integer, got {type(value).__name__}", path)
        return value
    if not isinstance(value, kind):
        raise ScenarioError(f"expected {kind.__name__}, got {type(value).__name__}", path)
    return value


def _fields(obj: Any, path: str, required: set[str], optional: set[str]) -> dict:
    obj = _expect(obj, dict, path)
    unknown = sorted(set(obj) - required - optional)
    if unknown:
        raise ScenarioError(f"unknown field {unknown[0]!r}", path)
    missing = sorted(required - set(obj))
    if missing:
        raise ScenarioError(f"missing field {missing[0]!r}", path)
    return obj


def _number_list(value: Any, kind, path: str) -> tuple:
    items = _expect(value, list, path)
    return tuple(_expect(v, kind, f"{path}[{k}]") for k, v in enumerate(items))


def scenario_from_dict(data: Any, source: str = "") -> Scenario:
    """Parse and validate an already-decoded scenario document."""
    top = _fields(data, "", {"network", "economics", "durations"}, {"name", "description"})
    net = _fields(top["network"], "network", {"nodes", "links"}, {"default_thresholds"})
    default_thresholds = None
    if "default_thresholds" in net:
        default_thresholds = _number_list(net["default_thresholds"], float, "network.default_thresholds")

    nodes = []
    for k, raw in enumerate(_expect(net["nodes"], list, "network.nodes")):
        path = f"network.nodes[{k}]"
        obj = _fields(raw, path, {"id", "role"}, set())
        nodes.append(NodeSpec(_expect(obj["id"], str, f"{path}.id"), _expect(obj["role"], str, f"{path}.role")))

    links = []
    link_paths = {}
    for k, raw in enumerate(_expect(net["links"], list, "network.links")):
        path = f"network.links[{k}]"
        obj = _fields(
            raw, path, {"id", "src", "dest", "distribution"},
            {"thresholds", "src_multiplicity", "dest_multiplicity"},
        )
        dist = _fields(obj["distribution"], f"{path}.distribution", {"mean", "std"}, {"family"})
        family = _expect(dist.get("family", "normal"), str, f"{path}.distribution.family")
        if family != "normal":
            raise ScenarioValidationError(f"unknown distribution family {family!r}", f"{path}.distribution.family")
        if "thresholds" in obj:
            thresholds = _number_list(obj["thresholds"], float, f"{path}.thresholds")
        elif default_thresholds is not None:
            thresholds = default_thresholds
        else:
            raise ScenarioError("missing field 'thresholds' and no network.default_thresholds", path)
        mult = {}
        for key in ("src_multiplicity", "dest_multiplicity"):
            if key in obj:
                mult[key] = _expect(obj[key], int, f"{path}.{key}")
            else:
                mult[key] = 1
                log.info("%s%s.%s not given; using default 1", source and f"{source}: ", path, key)
        link_id = _expect(obj["id"], str, f"{path}.id")
        link_paths[link_id] = path
        links.append(
            LinkSpec(
                link_id,
                _expect(obj["src"], str, f"{path}.src"),
                _expect(obj["dest"], str, f"{path}.dest"),
                Distribution(
                    _expect(dist["mean"], float, f"{path}.distribution.mean"),
                    _expect(dist["std"], float, f"{path}.distribution.std"),
                    family,
                ),
                thresholds,
                **mult,
            )
        )

    network = NetworkSpec(tuple(nodes), tuple(links))
    try:
        validate_network(network)
    except NetworkError as exc:
        raise ScenarioValidationError(str(exc), link_paths.get(exc.element, "network")) from exc

    econ_raw = _fields(
        top["economics"], "economics", {"data_size", "inspection_cost", "data_loss_cost"}, {"discount"}
    )
    if "discount" in econ_raw:
        discount = _expect(econ_raw["discount"], float, "economics.discount")
    else:
        discount = DEFAULT_DISCOUNT
        log.info("%seconomics.discount not given; using default %s", source and f"{source}: ", DEFAULT_DISCOUNT)
    try:
        econ = EconomicParams(
            _expect(econ_raw["data_size"], float, "economics.data_size"),
            _expect(econ_raw["inspection_cost"], float, "economics.inspection_cost"),
            _expect(econ_raw["data_loss_cost"], float, "economics.data_loss_cost"),
            discount,
        )
    except ValueError as exc:
        raise ScenarioValidationError(str(exc), "economics") from exc

    durations = _number_list(top["durations"], int, "durations")
    if not durations:
        raise ScenarioValidationError("durations must be nonempty", "durations")
    if any(n < 1 for n in durations) or any(b <= a for a, b in zip(durations, durations[1:])):
        raise ScenarioValidationError("durations must be positive and strictly increasing", "durations")

    return Scenario(
        network,
        econ,
        durations,
        _expect(top.get("name", ""), str, "name"),
        _expect(top.get("description", ""), str, "description"),
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    """Fully explicit document; loading it back yields an equal scenario."""
    out: dict[str, Any] = {}
    if scenario.name:
        out["name"] = scenario.name
    if scenario.description:
        out["description"] = scenario.description
    out["network"] = {
        "nodes": [{"id": n.id, "role": n.role} for n in scenario.network.nodes],
        "links": [
            {
                "id": l.id,
                "src": l.src,
                "dest": l.dest,
                "distribution": {"family": l.distribution.family, "mean": l.mean, "std": l.std},
                "thresholds": list(l.allowed_thresholds),
                "src_multiplicity": l.src_multiplicity,
                "dest_multiplicity": l.dest_multiplicity,
            }
            for l in scenario.network.links
        ],
    }
    e = scenario.economics
    out["economics"] = {
        "data_size": e.data_size,
        "inspection_cost": e.inspection_cost,
        "data_loss_cost": e.data_loss_cost,
        "discount": e.discount,
    }
    out["durations"] = list(scenario.durations)
    return out


def dumps_scenario(scenario: Scenario) -> str:
    return json.dumps(scenario_to_dict(scenario), indent=2) + "\n"


def loads_scenario(text: str, source: str = "") -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scenario_from_dict(data, source)


def load_scenario(path: str | Path) -> Scenario:
    """Load a scenario file, or a shipped one by name (``table1``, ``variance_symmetric``, ...)."""
    path_str = str(path)
    if path_str in BUILTIN_SCENARIOS:
        text = resources.files("exfilgame.scenarios").joinpath(f"{path_str}.json").read_text()
        return loads_scenario(text, path_str)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    return loads_scenario(text, path_str)
