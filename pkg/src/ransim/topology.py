"""Five-tier RAN node graph: non-RT RIC -> near-RT RIC -> CU -> DU -> RU."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidSpec, NoPath, UnknownNode


class NodeKind(str, Enum):
    NON_RT_RIC = "NonRtRic"
    NEAR_RT_RIC = "NearRtRic"
    CU = "Cu"
    DU = "Du"
    RU = "Ru"


# root first
TIERS = (NodeKind.NON_RT_RIC, NodeKind.NEAR_RT_RIC, NodeKind.CU, NodeKind.DU, NodeKind.RU)

_SHORT = {
    NodeKind.NON_RT_RIC: "nonrt",
    NodeKind.NEAR_RT_RIC: "nearrt",
    NodeKind.CU: "cu",
    NodeKind.DU: "du",
    NodeKind.RU: "ru",
}


@dataclass
class Node:
    id: int
    kind: NodeKind
    index: int
    compute_capacity: float
    compute_used: float = 0.0
    position: tuple[float, float] | None = None
    height_m: float | None = None

    @property
    def name(self) -> str:
        return f"{_SHORT[self.kind]}{self.index}"


@dataclass(frozen=True)
class Link:
    src: int  # parent (upper tier)
    dst: int  # child
    one_way_latency_ms: float


@dataclass
class Topology:
    nodes: list[Node]
    links: list[Link]
    parent: dict[int, int]
    area_side_m: float
    # request ids already committed by apply_plan
    applied_requests: set[str] = field(default_factory=set)

    def __post_init__(self):
        self._children: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        for child, par in sorted(self.parent.items()):
            self._children[par].append(child)
        self._uplink = {lk.dst: lk.one_way_latency_ms for lk in self.links}

    def node(self, node_id: int) -> Node:
        if not isinstance(node_id, (int, np.integer)) or not 0 <= node_id < len(self.nodes):
            raise UnknownNode(node_id)
        return self.nodes[int(node_id)]

    def of_kind(self, kind: NodeKind) -> list[int]:
        return [n.id for n in self.nodes if n.kind is kind]

    def children(self, node_id: int) -> list[int]:
        self.node(node_id)
        return list(self._children[node_id])

    def uplink_latency_ms(self, node_id: int) -> float:
        """One-way latency of the link from ``node_id`` to its parent."""
        return self._uplink[node_id]

    def ancestors(self, node_id: int) -> list[int]:
        """Ancestors from the direct parent up to the root."""
        self.node(node_id)
        out = []
        while node_id in self.parent:
            node_id = self.parent[node_id]
            out.append(node_id)
        return out

    def ancestor_of_kind(self, node_id: int, kind: NodeKind) -> int:
        for a in self.ancestors(node_id):
            if self.nodes[a].kind is kind:
                return a
        raise NoPath(f"{self.node(node_id).name} has no {kind.value} ancestor")

    def rus_under(self, node_id: int) -> list[int]:
        if self.node(node_id).kind is NodeKind.RU:
            return [node_id]
        out = []
        for c in self._children[node_id]:
            out.extend(self.rus_under(c))
        return sorted(out)

    def ru_positions(self) -> np.ndarray:
        return np.array([self.nodes[r].position for r in self.of_kind(NodeKind.RU)], dtype=float)

    def as_records(self) -> list[dict]:
        """Plain records for serialization and equality checks."""
        rows = []
        for n in self.nodes:
            rows.append({
                "id": n.id,
                "name": n.name,
                "kind": n.kind.value,
                "parent": self.parent.get(n.id, -1),
                "uplink_latency_ms": self._uplink.get(n.id, 0.0),
                "compute_capacity": n.compute_capacity,
                "compute_used": n.compute_used,
                "x_m": n.position[0] if n.position else None,
                "y_m": n.position[1] if n.position else None,
                "height_m": n.height_m,
            })
        return rows


def _counts(cfg) -> dict[NodeKind, int]:
    return {
        NodeKind.NON_RT_RIC: cfg.n_non_rt_ric,
        NodeKind.NEAR_RT_RIC: cfg.n_near_rt_ric,
        NodeKind.CU: cfg.n_cu,
        NodeKind.DU: cfg.n_du,
        NodeKind.RU: cfg.n_ru,
    }


def _capacities(cfg) -> dict[NodeKind, float]:
    return {
        NodeKind.NON_RT_RIC: cfg.capacity_non_rt_ric,
        NodeKind.NEAR_RT_RIC: cfg.capacity_near_rt_ric,
        NodeKind.CU: cfg.capacity_cu,
        NodeKind.DU: cfg.capacity_du,
        NodeKind.RU: cfg.capacity_ru,
    }


def _uplink_latencies(cfg) -> dict[NodeKind, float]:
    # keyed by the child kind of each link
    return {
        NodeKind.NEAR_RT_RIC: cfg.latency_non_rt_near_rt_ms,
        NodeKind.CU: cfg.latency_near_rt_cu_ms,
        NodeKind.DU: cfg.latency_cu_du_ms,
        NodeKind.RU: cfg.latency_du_ru_ms,
    }


def build_topology(spec, rng: np.random.Generator) -> Topology:
    """Build the node forest.

    Children of each tier attach round-robin by index to the tier above, so
    child ``k`` goes to parent ``k mod n_parents`` and any remainder lands on
    the lowest-indexed parents. RU positions are uniform over the square
    deployment area. ``spec`` may be a full scenario or its topology section.
    """
    cfg = getattr(spec, "topology", spec)
    counts = _counts(cfg)
    for kind, n in counts.items():
        if n < 1:
            raise InvalidSpec(f"node count for {kind.value} must be >= 1, got {n}")
    if not cfg.area_side_m > 0:
        raise InvalidSpec(f"area_side_m must be > 0, got {cfg.area_side_m}")
    caps = _capacities(cfg)
    lat = _uplink_latencies(cfg)
    for kind, v in lat.items():
        if not v > 0:
            raise InvalidSpec(f"link latency into {kind.value} must be > 0, got {v}")

    nodes: list[Node] = []
    ids_by_kind: dict[NodeKind, list[int]] = {}
    for kind in TIERS:
        ids = []
        for i in range(counts[kind]):
            node = Node(id=len(nodes), kind=kind, index=i, compute_capacity=float(caps[kind]))
            nodes.append(node)
            ids.append(node.id)
        ids_by_kind[kind] = ids

    xy = rng.uniform(0.0, cfg.area_side_m, size=(counts[NodeKind.RU], 2))
    for nid, (x, y) in zip(ids_by_kind[NodeKind.RU], xy):
        nodes[nid].position = (float(x), float(y))
        nodes[nid].height_m = float(cfg.ru_height_m)

    parent: dict[int, int] = {}
    links: list[Link] = []
    for upper, lower in zip(TIERS, TIERS[1:]):
        parents = ids_by_kind[upper]
        for k, child in enumerate(ids_by_kind[lower]):
            par = parents[k % len(parents)]
            parent[child] = par
            links.append(Link(src=par, dst=child, one_way_latency_ms=float(lat[lower])))

    return Topology(nodes=nodes, links=links, parent=parent, area_side_m=float(cfg.area_side_m))


def residual_capacity(topology: Topology, node: int) -> float:
    n = topology.node(node)
    return max(n.compute_capacity - n.compute_used, 0.0)


def control_loop_latency(topology: Topology, host: int, target_ru: int) -> float:
    """Round-trip latency (ms) along the tree path from ``host`` down to ``target_ru``."""
    topology.node(host)
    if topology.node(target_ru).kind is not NodeKind.RU:
        raise UnknownNode(f"{target_ru} is not an RU")
    total = 0.0
    cur = target_ru
    while cur != host:
        if cur not in topology.parent:
            raise NoPath(f"{topology.nodes[target_ru].name} is not under {topology.nodes[host].name}")
        total += topology.uplink_latency_ms(cur)
        cur = topology.parent[cur]
    return 2.0 * total
