"""Network graph, exfiltration routes and the finite strategy spaces of both players."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

NODE_ROLES = ("source", "internal", "sink")
DEFAULT_MAX_DEFENDER_STRATEGIES = 100_000


class NetworkError(ValueError):
    """Raised when a network violates one of its structural invariants.

    ``element`` names the offending node or link id (or ``None`` when the
    problem is global, e.g. no route at all).
    """

    def __init__(self, message: str, element: str | None = None) -> None:
        super().__init__(message if element is None else f"{message}: {element!r}")
        self.element = element


class CapacityError(ValueError):
    """Raised when a strategy space exceeds the configured size cap."""

    def __init__(self, size: int, cap: int) -> None:
        super().__init__(
            f"strategy space too large: {size} defender strategies exceeds cap {cap}"
        )
        self.size = size
        self.cap = cap


@dataclass(frozen=True)
class Distribution:
    """Tagged traffic distribution. Only the ``normal`` family is implemented."""

    mean: float
    std: float
    family: str = "normal"


@dataclass(frozen=True)
class NodeSpec:
    id: str
    role: str = "internal"


@dataclass(frozen=True)
class LinkSpec:
    id: str
    src: str
    dest: str
    distribution: Distribution
    allowed_thresholds: tuple[float, ...]
    src_multiplicity: int = 1
    dest_multiplicity: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "allowed_thresholds", tuple(float(t) for t in self.allowed_thresholds))

    @property
    def mean(self) -> float:
        return self.distribution.mean

    @property
    def std(self) -> float:
        return self.distribution.std

    @property
    def multiplicity(self) -> int:
        """Number of modeled device pairs, ``|l_src| * |l_dest|``."""
        return self.src_multiplicity * self.dest_multiplicity


@dataclass(frozen=True)
class NetworkSpec:
    nodes: tuple[NodeSpec, ...]
    links: tuple[LinkSpec, ...]
    _link_index: dict[str, LinkSpec] = field(init=False, repr=False, compare=False)
    _node_index: dict[str, NodeSpec] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "_link_index", {l.id: l for l in self.links})
        object.__setattr__(self, "_node_index", {n.id: n for n in self.nodes})

    def link(self, link_id: str) -> LinkSpec:
        try:
            return self._link_index[link_id]
        except KeyError:
            raise NetworkError("unknown link", link_id) from None

    def node(self, node_id: str) -> NodeSpec:
        try:
            return self._node_index[node_id]
        except KeyError:
            raise NetworkError("unknown node", node_id) from None

    @property
    def link_ids(self) -> tuple[str, ...]:
        return tuple(l.id for l in self.links)

    def replace_link(self, link: LinkSpec) -> NetworkSpec:
        """Return a copy with the link of the same id swapped for ``link``."""
        self.link(link.id)
        return NetworkSpec(self.nodes, tuple(link if l.id == link.id else l for l in self.links))


@dataclass(frozen=True)
class Route:
    link_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "link_ids", tuple(self.link_ids))
        if not self.link_ids:
            raise NetworkError("empty route")

    def __len__(self) -> int:
        return len(self.link_ids)

    def nodes(self, network: NetworkSpec) -> list[str]:
        links = [network.link(i) for i in self.link_ids]
        return [links[0].src] + [l.dest for l in links]

    def describe(self, network: NetworkSpec) -> str:
        return "->".join(self.nodes(network))


@dataclass(frozen=True)
class AttackerStrategy:
    route_index: int
    duration: int

    def __post_init__(self) -> None:
        if self.duration < 1:
            raise ValueError(f"duration must be >= 1, got {self.duration}")

    def label(self) -> str:
        return f"r{self.route_index}/n{self.duration}"


@dataclass(frozen=True)
class DefenderStrategy:
    """One threshold multiplier per link, stored in link-declaration order."""

    link_ids: tuple[str, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "link_ids", tuple(self.link_ids))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.link_ids) != len(self.values):
            raise ValueError("one threshold per link required")

    @classmethod
    def from_mapping(cls, network: NetworkSpec, thresholds: Mapping[str, float]) -> DefenderStrategy:
        missing = [i for i in network.link_ids if i not in thresholds]
        if missing:
            raise NetworkError("missing threshold for link", missing[0])
        extra = set(thresholds) - set(network.link_ids)
        if extra:
            raise NetworkError("threshold for unknown link", sorted(extra)[0])
        return cls(network.link_ids, tuple(thresholds[i] for i in network.link_ids))

    @classmethod
    def uniform(cls, network: NetworkSpec, threshold: float) -> DefenderStrategy:
        return cls(network.link_ids, (threshold,) * len(network.links))

    @property
    def thresholds(self) -> dict[str, float]:
        return dict(zip(self.link_ids, self.values))

    def __getitem__(self, link_id: str) -> float:
        try:
            return self.values[self.link_ids.index(link_id)]
        except ValueError:
            raise NetworkError("no threshold for link", link_id) from None

    def label(self) -> str:
        return "[" + ",".join(repr(v) for v in self.values) + "]"


def _check_link(link: LinkSpec) -> None:
    if link.distribution.family != "normal":
        raise NetworkError(f"unknown distribution family {link.distribution.family!r}", link.id)
    if not (math.isfinite(link.mean) and math.isfinite(link.std)):
        raise NetworkError("non-finite distribution parameter", link.id)
    if not link.std > 0:
        raise NetworkError("non-positive sigma", link.id)
    for m in (link.src_multiplicity, link.dest_multiplicity):
        if int(m) != m or m < 1:
            raise NetworkError("multiplicity must be a positive integer", link.id)
    if link.src == link.dest:
        raise NetworkError("link src equals dest", link.id)
    ts = link.allowed_thresholds
    if not ts:
        raise NetworkError("empty threshold list", link.id)
    if not all(math.isfinite(t) for t in ts):
        raise NetworkError("non-finite threshold", link.id)
    if any(b <= a for a, b in zip(ts, ts[1:])):
        raise NetworkError("thresholds must be strictly increasing", link.id)


def validate_network(spec: NetworkSpec) -> NetworkSpec:
    """Check every structural invariant and return ``spec`` unchanged.

    Raises :class:`NetworkError` naming the first offending element.
    """
    seen: set[str] = set()
    for node in spec.nodes:
        if node.id in seen:
            raise NetworkError("duplicate id", node.id)
        if node.role not in NODE_ROLES:
            raise NetworkError(f"unknown node role {node.role!r}", node.id)
        seen.add(node.id)
    node_ids = set(seen)
    for link in spec.links:
        if link.id in seen:
            raise NetworkError("duplicate id", link.id)
        seen.add(link.id)
        for end in (link.src, link.dest):
            if end not in node_ids:
                raise NetworkError(f"dangling endpoint {end!r}", link.id)
        _check_link(link)
    roles = {n.role for n in spec.nodes}
    if "source" not in roles:
        raise NetworkError("no route source→sink: network has no source node")
    if "sink" not in roles:
        raise NetworkError("no route source→sink: network has no sink node")
    if not _simple_paths(spec):
        raise NetworkError("no route source→sink")
    return spec


def _simple_paths(spec: NetworkSpec) -> list[tuple[str, ...]]:
    out_links: dict[str, list[LinkSpec]] = {n.id: [] for n in spec.nodes}
    for link in spec.links:
        out_links.setdefault(link.src, []).append(link)
    roles = {n.id: n.role for n in spec.nodes}
    paths: list[tuple[str, ...]] = []

    def walk(node: str, visited: set[str], path: list[str]) -> None:
        for link in out_links.get(node, ()):
            if link.dest in visited:
                continue
            path.append(link.id)
            if roles.get(link.dest) == "sink":
                paths.append(tuple(path))
            else:
                visited.add(link.dest)
                walk(link.dest, visited, path)
                visited.discard(link.dest)
            path.pop()

    for node in spec.nodes:
        if node.role == "source":
            walk(node.id, {node.id}, [])
    return paths


def enumerate_routes(spec: NetworkSpec) -> list[Route]:
    """All simple source-to-sink paths, sorted by their link-id sequence.

    A path stops at the first sink it reaches.
    """
    return [Route(p) for p in sorted(set(_simple_paths(spec)))]


def build_strategy_spaces(
    spec: NetworkSpec,
    durations: Sequence[int],
    max_defender_strategies: int = DEFAULT_MAX_DEFENDER_STRATEGIES,
) -> tuple[list[AttackerStrategy], list[DefenderStrategy]]:
    """Materialize attacker rows (route-major) and defender columns (odometer order)."""
    durations = [int(n) for n in durations]
    if not durations:
        raise ValueError("durations must be nonempty")
    if any(n < 1 for n in durations):
        raise ValueError("durations must be positive")
    if any(b <= a for a, b in zip(durations, durations[1:])):
        raise ValueError("durations must be strictly increasing")
    size = math.prod(len(l.allowed_thresholds) for l in spec.links)
    if size > max_defender_strategies:
        raise CapacityError(size, max_defender_strategies)

    n_routes = len(enumerate_routes(spec))
    attacker = [AttackerStrategy(r, n) for r in range(n_routes) for n in durations]
    ids = spec.link_ids
    defender = [
        DefenderStrategy(ids, combo)
        for combo in itertools.product(*(l.allowed_thresholds for l in spec.links))
    ]
    return attacker, defender


def network_automorphisms(spec: NetworkSpec, max_nodes: int = 8) -> list[dict[str, str]]:
    """Non-identity link relabelings that leave the network indistinguishable.

    A relabeling comes from a role-preserving node permutation that carries
    every link onto a link with identical distribution, multiplicities and
    threshold grid.  Networks larger than ``max_nodes`` are not searched.
    """
    nodes = [n.id for n in spec.nodes]
    if len(nodes) > max_nodes:
        return []
    role = {n.id: n.role for n in spec.nodes}

    def attrs(link: LinkSpec) -> tuple:
        return (link.distribution, link.src_multiplicity, link.dest_multiplicity, link.allowed_thresholds)

    groups: dict[tuple, list[str]] = {}
    for link in spec.links:
        groups.setdefault((link.src, link.dest, attrs(link)), []).append(link.id)

    found = []
    for image in itertools.permutations(nodes):
        phi = dict(zip(nodes, image))
        if any(role[a] != role[b] for a, b in phi.items()) or all(a == b for a, b in phi.items()):
            continue
        mapping: dict[str, str] = {}
        for (src, dest, key), ids in groups.items():
            target = groups.get((phi[src], phi[dest], key))
            if target is None or len(target) != len(ids):
                break
            mapping.update(zip(ids, target))
        else:
            if any(k != v for k, v in mapping.items()):
                found.append(mapping)
    return found
