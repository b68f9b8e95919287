"""PRB schedulers: Round Robin, Proportional Fair, Max-Min Fairness and the adaptive agent.

The functions here take UE ids plus per-PRB rates (bits one PRB carries this
slot) and return an :class:`Allocation`. Leaving ``backlog`` as ``None``
means every UE has unlimited demand. The simulator calls the array kernels
in :mod:`ransim.sched.kernels` directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .agent import (
    N_ACTIONS,
    N_STATES,
    PRESETS,
    AgentState,
    Observation,
    act,
    epsilon_at,
    learn,
    observe,
    reward_for,
)

__all__ = [
    "Allocation", "RrState", "PfState", "schedule_rr", "schedule_pf", "update_pf",
    "schedule_maxmin", "schedule_greedy", "AgentState", "Observation", "observe", "act",
    "learn", "reward_for", "epsilon_at", "PRESETS", "N_ACTIONS", "N_STATES",
]

PF_EPSILON = 1.0


@dataclass(frozen=True)
class Allocation:
    prbs: dict
    total_prbs: int

    def __getitem__(self, ue_id):
        return self.prbs.get(ue_id, 0)

    @property
    def used(self) -> int:
        return sum(self.prbs.values())


@dataclass(frozen=True)
class RrState:
    cursor: int = 0


@dataclass(frozen=True)
class PfState:
    avg_throughput: dict = field(default_factory=dict)
    window: float = 100.0

    def average(self, ue_id) -> float:
        return self.avg_throughput.get(ue_id, PF_EPSILON)


def _arrays(ue_ids, rates, backlog):
    n = len(ue_ids)
    bpp = np.ones(n) if rates is None else np.array([float(rates[u]) for u in ue_ids])
    if backlog is None:
        bl = np.full(n, np.inf)
    else:
        bl = np.array([float(backlog.get(u, 0)) for u in ue_ids])
    return bpp, bl


def _allocation(ue_ids, out, prbs):
    return Allocation({u: int(k) for u, k in zip(ue_ids, out) if k > 0}, int(prbs))


def schedule_rr(state: RrState, ue_ids: Sequence, prbs: int, backlog: Mapping | None = None,
                rates: Mapping | None = None) -> tuple[Allocation, RrState]:
    """Round Robin over the stable ordering ``ue_ids``; the cursor indexes that ordering."""
    bpp, bl = _arrays(ue_ids, rates, backlog)
    out = np.zeros(len(ue_ids), dtype=np.int64)
    cursor = kernels.rr_allocate(bpp, bl, int(prbs), int(state.cursor), out)
    return _allocation(ue_ids, out, prbs), RrState(int(cursor))


def schedule_pf(state: PfState, ue_ids: Sequence, rates: Mapping, prbs: int, backlog: Mapping | None = None,
                slot_duration_s: float = 1e-3, weights: Mapping | None = None) -> Allocation:
    bpp, bl = _arrays(ue_ids, rates, backlog)
    avg = np.array([state.average(u) for u in ue_ids])
    w = np.ones(len(ue_ids)) if weights is None else np.array([float(weights[u]) for u in ue_ids])
    out = np.zeros(len(ue_ids), dtype=np.int64)
    kernels.pf_allocate(bpp, bl, avg, w, int(prbs), float(slot_duration_s), 1.0 / state.window, out)
    return _allocation(ue_ids, out, prbs)


def update_pf(state: PfState, served_bits: Mapping, slot_duration_s: float = 1e-3) -> PfState:
    """EWMA update of every tracked UE's average throughput (unserved UEs decay)."""
    b = 1.0 / state.window
    ids = set(state.avg_throughput) | set(served_bits)
    new = {u: (1.0 - b) * state.average(u) + b * (served_bits.get(u, 0) / slot_duration_s) for u in ids}
    return PfState(new, state.window)


def schedule_maxmin(ue_ids: Sequence, rates: Mapping, prbs: int, backlog: Mapping | None = None) -> Allocation:
    bpp, bl = _arrays(ue_ids, rates, backlog)
    out = np.zeros(len(ue_ids), dtype=np.int64)
    kernels.maxmin_allocate(bpp, bl, int(prbs), out)
    return _allocation(ue_ids, out, prbs)


def schedule_greedy(ue_ids: Sequence, rates: Mapping, prbs: int, backlog: Mapping | None = None) -> Allocation:
    bpp, bl = _arrays(ue_ids, rates, backlog)
    out = np.zeros(len(ue_ids), dtype=np.int64)
    kernels.greedy_allocate(bpp, bl, int(prbs), out)
    return _allocation(ue_ids, out, prbs)
