"""Workload generators: operator requests for the orchestrator, UE sessions for the radio."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .topology import NodeKind, Topology


class Functionality(str, Enum):
    NETWORK_SLICING = "NetworkSlicing"
    SCHEDULING = "Scheduling"
    BEAMFORMING = "Beamforming"
    TRAFFIC_FORECASTING = "TrafficForecasting"
    ANOMALY_DETECTION = "AnomalyDetection"


class LatencyClass(str, Enum):
    REAL_TIME = "RealTime"
    NEAR_REAL_TIME = "NearRealTime"
    NON_REAL_TIME = "NonRealTime"

    @property
    def bound_ms(self) -> float:
        return _BOUNDS_MS[self]

    @property
    def priority(self) -> int:
        return _PRIORITY[self]


_BOUNDS_MS = {
    LatencyClass.REAL_TIME: 10.0,
    LatencyClass.NEAR_REAL_TIME: 1000.0,
    LatencyClass.NON_REAL_TIME: 60000.0,
}
_PRIORITY = {c: i for i, c in enumerate(LatencyClass)}

DEFAULT_MIX = {
    Functionality.SCHEDULING: 0.4,
    Functionality.BEAMFORMING: 0.3,
    Functionality.NETWORK_SLICING: 0.15,
    Functionality.TRAFFIC_FORECASTING: 0.1,
    Functionality.ANOMALY_DETECTION: 0.05,
}

# host tiers an operator may pin a request to, per functionality
LOCATION_CHOICES = {
    Functionality.SCHEDULING: (NodeKind.DU, NodeKind.NEAR_RT_RIC),
    Functionality.BEAMFORMING: (NodeKind.DU, NodeKind.NEAR_RT_RIC),
    Functionality.NETWORK_SLICING: (NodeKind.NEAR_RT_RIC,),
    Functionality.TRAFFIC_FORECASTING: (NodeKind.NON_RT_RIC,),
    Functionality.ANOMALY_DETECTION: (NodeKind.NEAR_RT_RIC, NodeKind.NON_RT_RIC),
}

_PER_RU = {Functionality.SCHEDULING, Functionality.BEAMFORMING}


@dataclass(frozen=True)
class OperatorRequest:
    id: str
    functionality: Functionality
    latency_class: LatencyClass
    location_constraint: NodeKind | None
    target_rus: tuple[int, ...]
    arrival_slot: int
    payload_bits: int = 0

    def __post_init__(self):
        if not self.target_rus:
            raise ValueError(f"request {self.id} has no target RUs")
        if self.arrival_slot < 0:
            raise ValueError(f"request {self.id} has negative arrival slot")


@dataclass(frozen=True)
class UeSession:
    ue_id: int
    position: tuple[float, float]
    serving_ru: int
    backlog_bits: int
    arrival_rate_bps: float


def _class_for(func: Functionality, rng: np.random.Generator) -> LatencyClass:
    if func in _PER_RU:
        return LatencyClass.REAL_TIME if rng.random() < 0.5 else LatencyClass.NEAR_REAL_TIME
    if func is Functionality.NETWORK_SLICING:
        return LatencyClass.NEAR_REAL_TIME
    return LatencyClass.NON_REAL_TIME


def generate_requests(rng: np.random.Generator, slot: int, load: int, topology: Topology,
                      mix=None, location_constraint_prob: float = 0.0) -> list[OperatorRequest]:
    """Draw ``load`` operator requests arriving at ``slot``.

    Scheduling and beamforming target one uniformly chosen RU; the other
    functionalities target every RU of one uniformly chosen DU.
    """
    if load < 0:
        raise ValueError("load must be >= 0")
    mix = DEFAULT_MIX if mix is None else mix
    funcs = list(mix)
    p = np.array([mix[f] for f in funcs], dtype=float)
    p = p / p.sum()
    rus = topology.of_kind(NodeKind.RU)
    dus = topology.of_kind(NodeKind.DU)
    du_rus = {d: tuple(topology.rus_under(d)) for d in dus}

    out = []
    for k in range(load):
        func = funcs[rng.choice(len(funcs), p=p)]
        cls = _class_for(func, rng)
        if func in _PER_RU:
            targets = (rus[rng.integers(len(rus))],)
        else:
            targets = du_rus[dus[rng.integers(len(dus))]]
        loc = None
        if location_constraint_prob > 0 and rng.random() < location_constraint_prob:
            choices = LOCATION_CHOICES[func]
            loc = choices[rng.integers(len(choices))]
        out.append(OperatorRequest(
            id=f"r{slot}-{k}",
            functionality=func,
            latency_class=cls,
            location_constraint=loc,
            target_rus=targets,
            arrival_slot=slot,
        ))
    return out


def nearest_ru(topology: Topology, xy) -> int:
    rus = topology.of_kind(NodeKind.RU)
    d = np.hypot(*(topology.ru_positions() - np.asarray(xy, dtype=float)).T)
    return rus[int(np.argmin(d))]  # argmin keeps the first (lowest id) on ties


def spawn_ues(rng: np.random.Generator, topology: Topology, n_ues: int,
              mean_rate_bps: float = 20e6, rate_spread: float = 0.0) -> list[UeSession]:
    """Place ``n_ues`` users uniformly and attach each to its nearest RU.

    With ``rate_spread`` > 0 each user's mean rate is drawn uniformly from
    ``mean_rate_bps * [1 - spread, 1 + spread]``.
    """
    if n_ues < 0:
        raise ValueError("n_ues must be >= 0")
    if n_ues == 0:
        return []
    xy = rng.uniform(0.0, topology.area_side_m, size=(n_ues, 2))
    rus = np.array(topology.of_kind(NodeKind.RU))
    ru_xy = topology.ru_positions()
    dist = np.hypot(xy[:, None, 0] - ru_xy[None, :, 0], xy[:, None, 1] - ru_xy[None, :, 1])
    serving = rus[np.argmin(dist, axis=1)]
    if rate_spread > 0:
        rates = mean_rate_bps * rng.uniform(1.0 - rate_spread, 1.0 + rate_spread, size=n_ues)
    else:
        rates = np.full(n_ues, float(mean_rate_bps))
    return [
        UeSession(ue_id=i, position=(float(x), float(y)), serving_ru=int(s),
                  backlog_bits=0, arrival_rate_bps=float(r))
        for i, ((x, y), s, r) in enumerate(zip(xy, serving, rates))
    ]


def arrival_packets(rates_bps, rng: np.random.Generator, slot_duration_ms: float, packet_bits: int):
    """Poisson packet counts per UE for one slot."""
    lam = np.asarray(rates_bps, dtype=float) * (slot_duration_ms / 1000.0) / packet_bits
    return rng.poisson(lam)


def accumulate_arrivals(session: UeSession, rng: np.random.Generator, slot_duration_ms: float,
                        packet_bits: int = 12_000) -> UeSession:
    if not slot_duration_ms > 0:
        raise ValueError("slot_duration_ms must be > 0")
    n = int(arrival_packets(session.arrival_rate_bps, rng, slot_duration_ms, packet_bits))
    return dataclasses.replace(session, backlog_bits=session.backlog_bits + n * packet_bits)
