"""ML/AI model catalog: capability records the orchestrator matches requests against."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .topology import NodeKind
from .traffic import Functionality, LatencyClass


class ModelKind(str, Enum):
    REINFORCEMENT_LEARNING = "ReinforcementLearning"
    FEDERATED_LEARNING = "FederatedLearning"
    DEEP_LEARNING_OPTIMIZER = "DeepLearningOptimizer"
    GRAPH_NEURAL_NETWORK = "GraphNeuralNetwork"
    TRANSFORMER_FORECASTER = "TransformerForecaster"


@dataclass(frozen=True)
class ModelDescriptor:
    id: str
    kind: ModelKind
    functionalities: frozenset[Functionality]
    compute_cost: float
    inference_latency_ms: float
    allowed_hosts: frozenset[NodeKind]

    def __post_init__(self):
        if not self.functionalities:
            raise ValueError(f"model {self.id}: functionalities must be non-empty")
        if not self.allowed_hosts:
            raise ValueError(f"model {self.id}: allowed_hosts must be non-empty")
        if not self.compute_cost > 0:
            raise ValueError(f"model {self.id}: compute_cost must be > 0")
        if not self.inference_latency_ms > 0:
            raise ValueError(f"model {self.id}: inference_latency_ms must be > 0")


@dataclass(frozen=True)
class Catalog:
    entries: tuple[ModelDescriptor, ...] = ()

    def __post_init__(self):
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError(f"duplicate model ids in catalog: {sorted(ids)}")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def get(self, model_id: str) -> ModelDescriptor:
        for e in self.entries:
            if e.id == model_id:
                return e
        raise KeyError(model_id)


def _model(id, kind, funcs, cost, latency, hosts):
    return ModelDescriptor(id=id, kind=kind, functionalities=frozenset(funcs), compute_cost=float(cost),
                           inference_latency_ms=float(latency), allowed_hosts=frozenset(hosts))


def default_catalog() -> Catalog:
    F, K, N = Functionality, ModelKind, NodeKind
    return Catalog((
        _model("rl-sched", K.REINFORCEMENT_LEARNING, {F.SCHEDULING, F.BEAMFORMING}, 2, 0.5,
               {N.DU, N.NEAR_RT_RIC}),
        _model("fl-anomaly", K.FEDERATED_LEARNING, {F.ANOMALY_DETECTION}, 4, 50.0,
               {N.NEAR_RT_RIC, N.NON_RT_RIC}),
        _model("dl-beam", K.DEEP_LEARNING_OPTIMIZER, {F.BEAMFORMING}, 3, 1.0, {N.DU}),
        _model("gnn-slicing", K.GRAPH_NEURAL_NETWORK, {F.NETWORK_SLICING}, 6, 100.0, {N.NEAR_RT_RIC}),
        _model("tf-forecast", K.TRANSFORMER_FORECASTER, {F.TRAFFIC_FORECASTING}, 8, 500.0, {N.NON_RT_RIC}),
    ))


def candidates(catalog: Catalog, functionality: Functionality, latency_class: LatencyClass) -> list[ModelDescriptor]:
    """Models offering ``functionality`` fast enough for ``latency_class``, cheapest first."""
    hits = [e for e in catalog
            if functionality in e.functionalities and e.inference_latency_ms <= latency_class.bound_ms]
    return sorted(hits, key=lambda e: (e.compute_cost, e.id))
