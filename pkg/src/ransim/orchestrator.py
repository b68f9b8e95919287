"""Orchestration engine: place operator requests onto catalog models and hosts.

Placement is greedy. Requests are served in latency-class priority order
(RealTime first) and then in arrival order. Each one takes the feasible
(model, host) pair with the smallest control-loop plus inference latency.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .catalog import Catalog, ModelKind, candidates
from .errors import CapacityViolation, DoubleApply, UnsupportedHost
from .topology import NodeKind, Topology, control_loop_latency
from .traffic import Functionality, LatencyClass, OperatorRequest


class AppType(str, Enum):
    DAPP = "dApp"
    XAPP = "xApp"
    RAPP = "rApp"


class DispatchInterface(str, Enum):
    E2 = "E2"
    A1 = "A1"
    O1 = "O1"


class RejectReason(str, Enum):
    NO_MODEL = "NoModel"
    NO_CAPACITY = "NoCapacity"
    LATENCY_INFEASIBLE = "LatencyInfeasible"


_APP_FOR = {
    NodeKind.RU: AppType.DAPP,
    NodeKind.DU: AppType.DAPP,
    NodeKind.NEAR_RT_RIC: AppType.XAPP,
    NodeKind.NON_RT_RIC: AppType.RAPP,
}

_CONTROL_FUNCS = {Functionality.SCHEDULING, Functionality.BEAMFORMING}


@dataclass(frozen=True)
class Deployment:
    request_id: str
    model_id: str
    host: int
    app_type: AppType
    control_latency_ms: float
    dispatch_interface: DispatchInterface
    functionality: Functionality
    latency_class: LatencyClass
    target_rus: tuple[int, ...]
    model_kind: ModelKind
    compute_cost: float
    inference_latency_ms: float

    @property
    def total_latency_ms(self) -> float:
        return self.control_latency_ms + self.inference_latency_ms


@dataclass(frozen=True)
class Rejection:
    request_id: str
    reason: RejectReason
    functionality: Functionality
    latency_class: LatencyClass


@dataclass
class DeploymentPlan:
    accepted: list[Deployment] = field(default_factory=list)
    rejected: list[Rejection] = field(default_factory=list)

    def __len__(self):
        return len(self.accepted) + len(self.rejected)


@dataclass(frozen=True)
class FeedbackLoop:
    request_id: str
    model_id: str
    cadence_slots: int
    metrics: tuple[str, ...]
    retrain: bool


@dataclass(frozen=True)
class OrchestrationPolicy:
    loops: tuple[FeedbackLoop, ...] = ()

    def __len__(self):
        return len(self.loops)


def app_type_for(host_kind: NodeKind, allow_cu_host: bool = False) -> AppType:
    if host_kind is NodeKind.CU:
        if allow_cu_host:
            return AppType.DAPP
        raise UnsupportedHost("CUs host no applications unless allow_cu_host is set")
    return _APP_FOR[host_kind]


def dispatch_interface_for(app_type: AppType, functionality: Functionality) -> DispatchInterface:
    if app_type is AppType.RAPP:
        return DispatchInterface.O1
    if app_type is AppType.XAPP and functionality not in _CONTROL_FUNCS:
        # policy-driven xApps receive their guidance from the non-RT RIC
        return DispatchInterface.A1
    return DispatchInterface.E2


def _path_hosts(topology: Topology, target_rus) -> list[int]:
    """Nodes that sit on the path to every target RU (common ancestors, or the RU itself)."""
    common = None
    for ru in target_rus:
        chain = {ru, *topology.ancestors(ru)}
        common = chain if common is None else common & chain
    return sorted(common or ())


def plan(requests: list[OperatorRequest], catalog: Catalog, topology: Topology,
         allow_cu_host: bool = False) -> DeploymentPlan:
    """Greedy latency-class-priority placement; does not mutate ``topology``."""
    used = {n.id: n.compute_used for n in topology.nodes}
    order = sorted(range(len(requests)),
                   key=lambda i: (requests[i].latency_class.priority, requests[i].arrival_slot, i))
    out = DeploymentPlan()
    for i in order:
        req = requests[i]
        bound = req.latency_class.bound_ms
        hosts = _path_hosts(topology, req.target_rus)
        best = None  # (total latency, host, rank, model, control latency)
        structural = latency_ok = False
        for rank, model in enumerate(candidates(catalog, req.functionality, req.latency_class)):
            for h in hosts:
                kind = topology.nodes[h].kind
                if kind not in model.allowed_hosts:
                    continue
                if req.location_constraint is not None and kind is not req.location_constraint:
                    continue
                if kind is NodeKind.CU and not allow_cu_host:
                    continue
                structural = True
                ctrl = max(control_loop_latency(topology, h, ru) for ru in req.target_rus)
                total = ctrl + model.inference_latency_ms
                if total > bound:
                    continue
                latency_ok = True
                node = topology.nodes[h]
                if node.compute_capacity - used[h] < model.compute_cost:
                    continue
                key = (total, h, rank)
                if best is None or key < best[:3]:
                    best = (total, h, rank, model, ctrl)
        if best is None:
            if not structural:
                reason = RejectReason.NO_MODEL
            elif latency_ok:
                reason = RejectReason.NO_CAPACITY
            else:
                reason = RejectReason.LATENCY_INFEASIBLE
            out.rejected.append(Rejection(req.id, reason, req.functionality, req.latency_class))
            continue
        _, h, _, model, ctrl = best
        used[h] += model.compute_cost
        app = app_type_for(topology.nodes[h].kind, allow_cu_host)
        out.accepted.append(Deployment(
            request_id=req.id,
            model_id=model.id,
            host=h,
            app_type=app,
            control_latency_ms=ctrl,
            dispatch_interface=dispatch_interface_for(app, req.functionality),
            functionality=req.functionality,
            latency_class=req.latency_class,
            target_rus=req.target_rus,
            model_kind=model.kind,
            compute_cost=model.compute_cost,
            inference_latency_ms=model.inference_latency_ms,
        ))
    return out


def apply_plan(topology: Topology, plan: DeploymentPlan) -> Topology:
    """Commit accepted deployments to node compute budgets (in place)."""
    for d in plan.accepted:
        if d.request_id in topology.applied_requests:
            raise DoubleApply(f"deployment for request {d.request_id} already applied")
    extra: dict[int, float] = {}
    for d in plan.accepted:
        extra[d.host] = extra.get(d.host, 0.0) + d.compute_cost
    for h, c in extra.items():
        node = topology.node(h)
        if node.compute_used + c > node.compute_capacity + 1e-9:
            raise CapacityViolation(
                f"{node.name}: used {node.compute_used} + {c} exceeds capacity {node.compute_capacity}")
    for h, c in extra.items():
        topology.nodes[h].compute_used += c
    topology.applied_requests.update(d.request_id for d in plan.accepted)
    return topology


def policy_for(plan: DeploymentPlan, slot_duration_ms: float = 1.0) -> OrchestrationPolicy:
    loops = []
    for d in plan.accepted:
        if d.model_kind is ModelKind.REINFORCEMENT_LEARNING:
            loops.append(FeedbackLoop(d.request_id, d.model_id, 1, ("sinr", "queue_length", "reward"), True))
        else:
            cadence = max(1, math.ceil(d.inference_latency_ms / slot_duration_ms))
            loops.append(FeedbackLoop(d.request_id, d.model_id, cadence, ("throughput", "latency"), False))
    return OrchestrationPolicy(tuple(loops))


PLAN_COLUMNS = ("slot", "request_id", "functionality", "class", "model_id", "host", "app_type",
                "control_latency_ms", "status", "reason")


def plan_rows(plan: DeploymentPlan, topology: Topology, slot: int) -> list[dict]:
    rows = []
    for d in plan.accepted:
        rows.append({
            "slot": slot, "request_id": d.request_id, "functionality": d.functionality.value,
            "class": d.latency_class.value, "model_id": d.model_id, "host": topology.nodes[d.host].name,
            "app_type": d.app_type.value, "control_latency_ms": d.control_latency_ms,
            "status": "accepted", "reason": "",
        })
    for r in plan.rejected:
        rows.append({
            "slot": slot, "request_id": r.request_id, "functionality": r.functionality.value,
            "class": r.latency_class.value, "model_id": "", "host": "", "app_type": "",
            "control_latency_ms": "", "status": "rejected", "reason": r.reason.value,
        })
    return rows
