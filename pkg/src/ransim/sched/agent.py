"""Tabular Q-learning agent choosing one allocation preset per slot for one DU."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFiniteReward

PRESETS = ("pf", "pf_latency_boost", "maxmin_blend", "throughput_greedy")
N_ACTIONS = len(PRESETS)

# lower edges of buckets 1..3; bucket 0 is everything below the first edge
LOAD_EDGES = (3, 6, 11)          # backlogged UEs: 0-2, 3-5, 6-10, 11+
CQI_EDGES = (1.0, 3.0, 6.0)      # mean SE bit/s/Hz: <1, 1-3, 3-6, >=6
N_STATES = (len(LOAD_EDGES) + 1) * (len(CQI_EDGES) + 1)


@dataclass(frozen=True)
class Observation:
    load_bucket: int
    cqi_bucket: int

    @property
    def state(self) -> int:
        return self.load_bucket * (len(CQI_EDGES) + 1) + self.cqi_bucket


def observe(n_backlogged: int, mean_se: float) -> Observation:
    load = int(np.searchsorted(LOAD_EDGES, n_backlogged, side="right"))
    cqi = int(np.searchsorted(CQI_EDGES, mean_se, side="right"))
    return Observation(load, cqi)


@dataclass
class AgentState:
    q_table: np.ndarray = field(default_factory=lambda: np.zeros((N_STATES, N_ACTIONS)))
    epsilon: float = 0.3
    alpha: float = 0.1
    gamma: float = 0.9
    reward_weights: tuple[float, float] = (1.0, 1.0)


def epsilon_at(step: int, start: float = 0.3, end: float = 0.01, decay_steps: int = 5000) -> float:
    """Exponential decay from ``start`` to ``end`` over ``decay_steps``, flat afterwards."""
    if decay_steps <= 0 or start <= 0:
        return end
    frac = min(step, decay_steps) / decay_steps
    return start * (end / start) ** frac


def act(agent: AgentState, obs: Observation, rng: np.random.Generator) -> int:
    if rng.random() < agent.epsilon:
        return int(rng.integers(N_ACTIONS))
    return int(np.argmax(agent.q_table[obs.state]))  # first maximum wins ties


def reward_for(mean_se: float, se_cap: float, mean_hol_ms: float, bound_ms: float,
               weights: tuple[float, float] = (1.0, 1.0)) -> float:
    w_se, w_lat = weights
    return w_se * (mean_se / se_cap) - w_lat * (mean_hol_ms / bound_ms)


def learn(agent: AgentState, obs: Observation, action: int, reward: float, next_obs: Observation) -> AgentState:
    """One-step Q-learning update, applied in place."""
    if not math.isfinite(reward):
        raise NonFiniteReward(f"reward {reward!r}")
    q = agent.q_table
    target = reward + agent.gamma * q[next_obs.state].max()
    q[obs.state, action] += agent.alpha * (target - q[obs.state, action])
    return agent
