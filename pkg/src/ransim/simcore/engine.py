"""Discrete-time engine: orchestration epochs, per-slot radio, per-DU scheduling."""

from __future__ import annotations

import logging
import time

import numpy as np

from ..catalog import ModelKind, default_catalog
from ..channel import (
    draw_los_shadow,
    fast_fade_db,
    los_probability,
    path_loss_array,
    spectral_efficiency,
)
from ..config import ScenarioSpec, Scheduler
from ..errors import InvariantViolation
from ..orchestrator import apply_plan, plan, plan_rows, policy_for
from ..sched import kernels
from ..sched.agent import AgentState, act, epsilon_at, learn, observe, reward_for
from ..topology import NodeKind, build_topology, control_loop_latency
from ..traffic import Functionality, arrival_packets, generate_requests, spawn_ues
from .report import SimulationReport

log = logging.getLogger(__name__)

STREAM_TOPOLOGY = 1
STREAM_UES = 2
STREAM_REQUESTS = 3
STREAM_ARRIVALS = 4
STREAM_CHANNEL = 5
STREAM_AGENT = 6

PF, PF_BOOST, MAXMIN_BLEND, GREEDY = range(4)
NO_AGENT = -1

_AGENT_FUNCS = {Functionality.SCHEDULING, Functionality.BEAMFORMING}


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for ``(seed, *key)``; equal keys give equal streams."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


class Simulation:
    """One scenario run. ``step()`` advances one slot; ``run()`` drives all of them."""

    def __init__(self, spec: ScenarioSpec):
        self.spec = spec.validate()
        s = spec
        self.slot = 0
        self.slot_s = s.slot_duration_ms / 1000.0
        self.radio = s.radio
        self.prb_bw = s.radio.prb_bandwidth_hz
        self.n_prbs = s.radio.prb_count
        self.catalog = s.catalog if s.catalog is not None else default_catalog()

        self.topology = build_topology(s, substream(s.seed, STREAM_TOPOLOGY))
        topo = self.topology
        sessions = spawn_ues(substream(s.seed, STREAM_UES), topo, s.n_ues,
                             s.traffic.mean_rate_bps, s.traffic.rate_spread)

        self.ru_ids = topo.of_kind(NodeKind.RU)
        self.du_ids = topo.of_kind(NodeKind.DU)
        ru_col = {r: j for j, r in enumerate(self.ru_ids)}
        du_idx = {d: k for k, d in enumerate(self.du_ids)}
        self.ru_du = np.array([du_idx[topo.parent[r]] for r in self.ru_ids])

        # UEs are stored grouped by DU so each DU owns a contiguous block
        ue_ids = np.array([u.ue_id for u in sessions], dtype=np.int64)
        ue_col = np.array([ru_col[u.serving_ru] for u in sessions], dtype=np.int64)
        ue_du = self.ru_du[ue_col] if len(sessions) else np.zeros(0, dtype=np.int64)
        order = np.lexsort((ue_ids, ue_du))
        self.sessions = [sessions[i] for i in order]
        self.ue_ids = ue_ids[order]
        self.serving_col = ue_col[order]
        self.ue_du = ue_du[order]
        self.du_ptr = np.searchsorted(self.ue_du, np.arange(len(self.du_ids) + 1), side="left")
        self.rates_bps = np.array([u.arrival_rate_bps for u in self.sessions], dtype=float)
        n = len(self.sessions)
        self.n_ues = n

        ue_xy = np.array([u.position for u in self.sessions], dtype=float).reshape(n, 2)
        ru_xy = topo.ru_positions()
        d2d = np.hypot(ue_xy[:, None, 0] - ru_xy[None, :, 0], ue_xy[:, None, 1] - ru_xy[None, :, 1])
        d2d = np.maximum(d2d, s.radio.min_d2d_m)
        h_bs, h_ut, fc = s.topology.ru_height_m, s.radio.ue_height_m, s.radio.fc_ghz
        self.p_los = los_probability(d2d, h_ut)
        self.pl_los = path_loss_array(d2d, True, h_bs, h_ut, fc)
        self.pl_nlos = path_loss_array(d2d, False, h_bs, h_ut, fc)
        # full-buffer interference from every RU under a different DU
        self.intf_mask = (self.ru_du[None, :] != self.ue_du[:, None]).astype(float)
        self.p_prb_dbm = s.radio.tx_power_per_prb_dbm() + s.radio.antenna_gain_db
        self.noise_mw = 10.0 ** (s.radio.noise_per_prb_dbm() / 10.0)

        cap = s.n_slots + 2
        self.q_slot = np.zeros((n, cap), dtype=np.int64)
        self.q_count = np.zeros((n, cap), dtype=np.int64)
        self.q_head = np.zeros(n, dtype=np.int64)
        self.q_tail = np.zeros(n, dtype=np.int64)
        self.front_rem = np.zeros(n, dtype=np.int64)
        self.backlog = np.zeros(n, dtype=np.int64)
        self.avg_bps = np.ones(n)
        self.hol = np.zeros(n)

        default_ctrl = [control_loop_latency(topo, topo.parent[self.ru_ids[c]], self.ru_ids[c])
                        for c in self.serving_col]
        self.overhead_ms = np.array(default_ctrl, dtype=float)

        n_du = len(self.du_ids)
        self.rr_cursor = np.zeros(n_du, dtype=np.int64)
        sc = s.sched
        self.agents = [AgentState(epsilon=sc.epsilon_start, alpha=sc.alpha, gamma=sc.gamma,
                                  reward_weights=(sc.w_se, sc.w_lat)) for _ in range(n_du)]
        self.agent_rngs = [substream(s.seed, STREAM_AGENT, k) for k in range(n_du)]
        self.agent_ctrl_ms = np.full(n_du, np.inf)
        self.agent_bound_ms = np.full(n_du, np.inf)
        self._pending = [None] * n_du  # (obs, action, reward) awaiting next observation

        self.plan_rows: list[dict] = []
        self.policy_loops = 0
        ns = s.n_slots
        self.rec_mean_se = np.full(ns, np.nan)
        self.rec_jain = np.full(ns, np.nan)
        self.rec_rejected = np.zeros(ns, dtype=np.int64)
        self.rec_prbs = np.zeros(ns, dtype=np.int64)
        self.rec_arrived = np.zeros(ns, dtype=np.int64)
        self.rec_served = np.zeros((ns, n), dtype=np.int64)
        self.rec_backlog = np.zeros(ns, dtype=np.int64)
        self.rec_actions = np.full((ns, n_du), NO_AGENT, dtype=np.int8)
        self._lat_slot: list[np.ndarray] = []
        self._lat_ms: list[np.ndarray] = []
        self._lat_w: list[np.ndarray] = []

    # orchestration -------------------------------------------------------

    def _epoch(self, t: int) -> int:
        s = self.spec
        reqs = generate_requests(substream(s.seed, STREAM_REQUESTS, t), t, s.requests_per_slot, self.topology,
                                 s.traffic.mix, s.traffic.location_constraint_prob)
        p = plan(reqs, self.catalog, self.topology, s.orchestrator.allow_cu_host)
        apply_plan(self.topology, p)
        self.policy_loops += len(policy_for(p, s.slot_duration_ms))
        self.plan_rows.extend(plan_rows(p, self.topology, t))
        du_idx = {d: k for k, d in enumerate(self.du_ids)}
        for d in p.accepted:
            if d.model_kind is not ModelKind.REINFORCEMENT_LEARNING or d.functionality not in _AGENT_FUNCS:
                continue
            for ru in d.target_rus:
                k = du_idx[self.topology.parent[ru]]
                self.agent_ctrl_ms[k] = min(self.agent_ctrl_ms[k], d.control_latency_ms)
                self.agent_bound_ms[k] = min(self.agent_bound_ms[k], d.latency_class.bound_ms)
        if s.scheduler is Scheduler.ORCHESTRAN:
            for k in range(len(self.du_ids)):
                if np.isfinite(self.agent_ctrl_ms[k]):
                    a, b = self.du_ptr[k], self.du_ptr[k + 1]
                    self.overhead_ms[a:b] = self.agent_ctrl_ms[k]
        if s.check_invariants:
            for node in self.topology.nodes:
                if node.compute_used > node.compute_capacity + 1e-9:
                    raise InvariantViolation(f"slot {t}: {node.name} compute {node.compute_used} > {node.compute_capacity}")
        return len(p.rejected)

    # radio ---------------------------------------------------------------

    def _channel(self, t: int):
        rng = substream(self.spec.seed, STREAM_CHANNEL, t)
        r = self.radio
        los, shadow = draw_los_shadow(self.p_los, rng, r.shadow_sigma_los_db, r.shadow_sigma_nlos_db)
        fade = fast_fade_db(los, rng, r.rician_k_db)
        gain_db = self.p_prb_dbm - np.where(los, self.pl_los, self.pl_nlos) - shadow + fade
        rx = 10.0 ** (gain_db / 10.0)
        sig = rx[np.arange(self.n_ues), self.serving_col]
        intf = (rx * self.intf_mask).sum(axis=1)
        return 10.0 * np.log10(sig / (self.noise_mw + intf))

    def _bits_per_prb(self, sinr):
        return spectral_efficiency(sinr, self.radio.se_cap) * self.prb_bw * self.slot_s

    # scheduling ----------------------------------------------------------

    def _boost_top(self, a, rank, eligible, sinr, eff_bpp):
        """Steer the extra beam gain onto the highest-ranked eligible UE of the block."""
        if not eligible.any():
            return
        top = int(np.argmax(np.where(eligible, rank, -np.inf)))
        eff_bpp[a + top] = self._bits_per_prb(sinr[a + top] + self.spec.sched.beam_gain_db)

    def _run_preset(self, preset, k, a, b, bl, bpp, sinr, eff_bpp, out):
        P = self.n_prbs
        sc = self.spec.sched
        inv_tc = 1.0 / sc.pf_window_slots
        avg = self.avg_bps[a:b]
        if preset == PF:
            kernels.pf_allocate(bpp, bl, avg, np.ones(b - a), P, self.slot_s, inv_tc, out)
        elif preset == PF_BOOST:
            w = 1.0 + self.hol[a:b] / self.spec.slot_duration_ms
            eligible = (bl > 0) & (bpp >= kernels.MIN_BITS_PER_PRB)
            self._boost_top(a, w * bpp / avg, eligible, sinr, eff_bpp)
            kernels.pf_allocate(eff_bpp[a:b], bl, avg, w, P, self.slot_s, inv_tc, out)
        elif preset == MAXMIN_BLEND:
            m = int(round(P * sc.maxmin_blend_fraction))
            kernels.maxmin_allocate(bpp, bl, m, out)
            kernels.pf_allocate(bpp, bl, avg, np.ones(b - a), P - m, self.slot_s, inv_tc, out)
        elif preset == GREEDY:
            eligible = (bl > 0) & (bpp >= kernels.MIN_BITS_PER_PRB)
            self._boost_top(a, bpp, eligible, sinr, eff_bpp)
            kernels.greedy_allocate(eff_bpp[a:b], bl, P, out)
        else:
            raise ValueError(preset)

    def _observe(self, k, a, b, bl, bpp):
        waiting = int(np.count_nonzero(self.hol[a:b] > 0))
        backlogged = bl > 0
        se = bpp / (self.prb_bw * self.slot_s)
        mean_se = float(se[backlogged].mean()) if backlogged.any() else (float(se.mean()) if b > a else 0.0)
        return observe(waiting, mean_se)

    def _schedule(self, t, bl_all, bpp_all, sinr, eff_bpp, prbs):
        sched = self.spec.scheduler
        P = self.n_prbs
        for k in range(len(self.du_ids)):
            a, b = self.du_ptr[k], self.du_ptr[k + 1]
            if a == b:
                continue
            bl, bpp, out = bl_all[a:b], bpp_all[a:b], prbs[a:b]
            if sched is Scheduler.ROUND_ROBIN:
                self.rr_cursor[k] = kernels.rr_allocate(bpp, bl, P, self.rr_cursor[k], out)
            elif sched is Scheduler.PROPORTIONAL_FAIR:
                self._run_preset(PF, k, a, b, bl, bpp, sinr, eff_bpp, out)
            elif sched is Scheduler.MAX_MIN_FAIRNESS:
                kernels.maxmin_allocate(bpp, bl, P, out)
            elif not np.isfinite(self.agent_ctrl_ms[k]):
                # no adaptive scheduler deployed for this DU yet
                self._run_preset(PF, k, a, b, bl, bpp, sinr, eff_bpp, out)
            else:
                agent = self.agents[k]
                obs = self._observe(k, a, b, bl, bpp)
                if self._pending[k] is not None:
                    p_obs, p_act, p_rew = self._pending[k]
                    learn(agent, p_obs, p_act, p_rew, obs)
                sc = self.spec.sched
                agent.epsilon = epsilon_at(t, sc.epsilon_start, sc.epsilon_end, sc.epsilon_decay_slots)
                action = act(agent, obs, self.agent_rngs[k])
                self._run_preset(action, k, a, b, bl, bpp, sinr, eff_bpp, out)
                self.rec_actions[t, k] = action
                self._pending[k] = (obs, action, None)

    def _agent_rewards(self, served, prbs):
        sc = self.spec.sched
        for k in range(len(self.du_ids)):
            if self._pending[k] is None or self._pending[k][2] is not None:
                continue
            a, b = self.du_ptr[k], self.du_ptr[k + 1]
            used = prbs[a:b].sum()
            se = served[a:b].sum() / (used * self.prb_bw * self.slot_s) if used else 0.0
            waiting = self.backlog[a:b] > 0
            hol = float(self.hol[a:b][waiting].mean()) if waiting.any() else 0.0
            r = reward_for(se, self.radio.se_cap, hol, self.agent_bound_ms[k], (sc.w_se, sc.w_lat))
            obs, action, _ = self._pending[k]
            self._pending[k] = (obs, action, r)

    # invariants ----------------------------------------------------------

    def _check_slot(self, t, bl_prev, arrived_bits, served, prbs, eff_bpp):
        P = self.n_prbs
        bl_before = bl_prev + arrived_bits
        eligible = (bl_before > 0) & (eff_bpp >= kernels.MIN_BITS_PER_PRB)
        cap_bits = np.floor(prbs * eff_bpp)
        for k in range(len(self.du_ids)):
            a, b = self.du_ptr[k], self.du_ptr[k + 1]
            used = int(prbs[a:b].sum())
            if used > P:
                raise InvariantViolation(f"slot {t} DU {k}: {used} PRBs > {P}")
            unmet = eligible[a:b] & (cap_bits[a:b] < bl_before[a:b])
            if used < P and unmet.any():
                raise InvariantViolation(f"slot {t} DU {k}: {P - used} PRBs idle with unmet demand")
        if np.any(prbs[~eligible] > 0):
            raise InvariantViolation(f"slot {t}: PRBs granted to a UE without demand")
        if np.any(served > prbs * eff_bpp + 1e-6):
            raise InvariantViolation(f"slot {t}: served bits exceed Shannon capacity of allocation")
        if np.any(self.backlog != bl_before - served) or np.any(self.backlog < 0):
            raise InvariantViolation(f"slot {t}: backlog not conserved")

    def check_queues(self):
        q = np.zeros(self.n_ues, dtype=np.int64)
        kernels.queued_bits(self.q_count, self.q_head, self.q_tail, self.front_rem,
                            self.spec.traffic.packet_bits, q)
        if np.any(q != self.backlog):
            raise InvariantViolation(f"slot {self.slot}: queue contents disagree with backlog")

    # main loop -----------------------------------------------------------

    def step(self):
        s = self.spec
        t = self.slot
        pkt = s.traffic.packet_bits
        if t % s.orchestrator.epoch_slots == 0:
            self.rec_rejected[t] = self._epoch(t)
            if s.check_invariants:
                self.check_queues()

        bl_prev = self.backlog.copy()
        counts = arrival_packets(self.rates_bps, substream(s.seed, STREAM_ARRIVALS, t), s.slot_duration_ms, pkt)
        counts = counts.astype(np.int64)
        kernels.push_arrivals(self.q_slot, self.q_count, self.q_head, self.q_tail, self.front_rem, counts, t, pkt)
        arrived_bits = counts * pkt
        self.backlog += arrived_bits

        sinr = self._channel(t)
        bpp = self._bits_per_prb(sinr)
        eff_bpp = bpp.copy()
        kernels.head_of_line_ms(self.q_slot, self.q_head, self.q_tail, t, s.slot_duration_ms, self.hol)

        bl_f = self.backlog.astype(float)
        prbs = np.zeros(self.n_ues, dtype=np.int64)
        self._schedule(t, bl_f, bpp, sinr, eff_bpp, prbs)

        served = np.minimum(self.backlog, np.floor(prbs * eff_bpp).astype(np.int64))
        rate = prbs * eff_bpp / self.slot_s
        # each queued batch yields at most one latency sample
        live = (self.q_tail - self.q_head) % self.q_slot.shape[1]
        buf = max(int(live[served > 0].sum()), 1)
        lat = np.empty(buf)
        w = np.empty(buf, dtype=np.int64)
        ns = kernels.drain_queues(self.q_slot, self.q_count, self.q_head, self.q_tail, self.front_rem,
                                  served, rate, self.overhead_ms, t, s.slot_duration_ms, pkt, lat, w)
        self.backlog -= served
        if s.check_invariants:
            self._check_slot(t, bl_prev, arrived_bits, served, prbs, eff_bpp)

        kernels.head_of_line_ms(self.q_slot, self.q_head, self.q_tail, t, s.slot_duration_ms, self.hol)
        self._agent_rewards(served, prbs)
        tc = s.sched.pf_window_slots
        self.avg_bps = (1.0 - 1.0 / tc) * self.avg_bps + (1.0 / tc) * (served / self.slot_s)

        used = int(prbs.sum())
        self.rec_prbs[t] = used
        if used:
            self.rec_mean_se[t] = served.sum() / (used * self.prb_bw * self.slot_s)
        active = bl_f > 0
        if active.any() and served[active].sum() > 0:
            x = served[active].astype(float)
            self.rec_jain[t] = x.sum() ** 2 / (x.size * np.square(x).sum())
        self.rec_served[t] = served
        self.rec_arrived[t] = arrived_bits.sum()
        self.rec_backlog[t] = self.backlog.sum()
        if ns:
            self._lat_slot.append(np.full(ns, t, dtype=np.int64))
            self._lat_ms.append(lat[:ns].copy())
            self._lat_w.append(w[:ns].copy())
        self.slot += 1

    def queued_packet_ages_ms(self):
        """(age_ms, count) for every packet still queued, measured at the current slot."""
        ages, counts = [], []
        cap = self.q_slot.shape[1]
        for u in range(self.n_ues):
            h = self.q_head[u]
            while h != self.q_tail[u]:
                ages.append((self.slot - 1 - self.q_slot[u, h]) * self.spec.slot_duration_ms)
                counts.append(self.q_count[u, h])
                h = (h + 1) % cap
        return np.array(ages, dtype=float), np.array(counts, dtype=np.int64)

    def report(self, wall_clock_s: float = 0.0) -> SimulationReport:
        cat = (lambda xs, dt: np.concatenate(xs) if xs else np.zeros(0, dtype=dt))
        ages, counts = self.queued_packet_ages_ms()
        return SimulationReport(
            spec=self.spec,
            ue_ids=self.ue_ids.copy(),
            mean_se=self.rec_mean_se,
            jain=self.rec_jain,
            rejected=self.rec_rejected,
            prbs_used=self.rec_prbs,
            arrived_bits=self.rec_arrived,
            served_bits=self.rec_served,
            backlog_bits=self.rec_backlog,
            actions=self.rec_actions,
            lat_slot=cat(self._lat_slot, np.int64),
            lat_ms=cat(self._lat_ms, float),
            lat_w=cat(self._lat_w, np.int64),
            queued_age_ms=ages,
            queued_count=counts,
            deployments=list(self.plan_rows),
            wall_clock_s=wall_clock_s,
        )


def run(spec: ScenarioSpec) -> SimulationReport:
    """Execute every slot of ``spec`` and return the report."""
    start = time.perf_counter()
    sim = Simulation(spec)
    for _ in range(spec.n_slots):
        sim.step()
    if spec.check_invariants:
        sim.check_queues()
    log.info("run %s seed=%d n_ues=%d done in %.1fs", spec.scheduler.value, spec.seed, spec.n_ues,
             time.perf_counter() - start)
    return sim.report(time.perf_counter() - start)
