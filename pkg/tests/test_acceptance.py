"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

The scheduler comparison (criteria 1 and 2) needs a full sweep of four
schedulers x five seeds x two loads at 7000 slots. It runs once per session
through the ``ransim sweep`` command and is shared by criteria 1, 2 and 7.
"""

import csv
import itertools
import os
import re
import time

import numpy as np
import pytest
from click.testing import CliRunner

from ransim.catalog import default_catalog
from ransim.channel import LinkGeometry, draw_los_shadow, los_probability, path_loss_db
from ransim.cli import main
from ransim.config import ScenarioSpec, Scheduler
from ransim.orchestrator import apply_plan, plan
from ransim.sched import schedule_maxmin
from ransim.simcore.engine import Simulation
from ransim.topology import build_topology
from ransim.traffic import LatencyClass, generate_requests

from test_channel import PATH_LOSS_TABLE

SEEDS = "0..4"
N_SEEDS = 5
JOBS = max(2, os.cpu_count() or 1)


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {n}] {'PASS' if ok else 'FAIL'}: {detail}")
        return ok
    return emit


def _read_comparison(path):
    """{n_ues: {scheduler: {metric: value}}} from a sweep comparison file."""
    out, n, fields = {}, None, None
    with open(path) as f:
        for row in csv.reader(f):
            if not row or row[0].startswith("#"):
                m = re.match(r"# n_ues = (\d+);", row[0]) if row else None
                if m:
                    n = int(m.group(1))
                    out[n] = {}
                continue
            if row[0] in ("scheduler", "a"):
                fields = row if row[0] == "scheduler" else None
            elif fields:
                out[n][row[0]] = {k: float(v) for k, v in zip(fields[1:], row[1:])}
    return out


@pytest.fixture(scope="module")
def sweep(tmp_path_factory):
    out = tmp_path_factory.mktemp("acceptance_sweep")
    start = time.perf_counter()
    res = CliRunner().invoke(main, ["sweep", "--out", str(out), "--schedulers", "RR,PF,MMF,OrchestRAN",
                                    "--seeds", SEEDS, "--loads", "200,400", "--jobs", str(JOBS)])
    assert res.exit_code == 0, res.output
    return out, _read_comparison(out / "comparison.csv"), time.perf_counter() - start


def test_criterion_1_se_ordering(sweep, verdict):
    _, table, elapsed = sweep
    rows = table[400]
    se = {s: rows[s]["mean_se"] for s in rows}
    orch = se["OrchestRAN"]
    checks = {
        "RoundRobin x1.10": orch >= 1.10 * se["RoundRobin"],
        "ProportionalFair x1.05": orch >= 1.05 * se["ProportionalFair"],
        "MaxMinFairness x1.05": orch >= 1.05 * se["MaxMinFairness"],
    }
    ok = all(checks.values()) and all(r["n_runs"] >= N_SEEDS for r in rows.values())
    detail = ", ".join(f"{k}={v:.4f}" for k, v in se.items())
    failed = [k for k, v in checks.items() if not v]
    verdict(1, ok, f"400 UEs mean SE {detail}; unmet: {failed or 'none'}; sweep {elapsed / 60:.1f} min")
    assert ok, f"SE ordering not met: {failed} ({detail})"


def test_criterion_2_latency_ordering(sweep, verdict):
    _, table, _ = sweep
    rows = table[200]
    lat = {s: rows[s]["mean_latency_ms"] for s in rows}
    var = {s: rows[s]["latency_var_ms2"] for s in rows}
    others = [s for s in rows if s != "OrchestRAN"]
    ordering = all(lat["OrchestRAN"] < lat[s] for s in others)
    rr_var = all(var["RoundRobin"] > var[s] for s in rows if s != "RoundRobin")
    ok = ordering and rr_var and all(r["n_runs"] >= N_SEEDS for r in rows.values())
    verdict(2, ok, "200 UEs mean latency " + ", ".join(f"{s}={v:.3f}ms" for s, v in lat.items())
            + "; variance " + ", ".join(f"{s}={v:.1f}" for s, v in var.items()))
    assert ordering, lat
    assert rr_var, var


def test_criterion_3_path_loss_oracle(verdict):
    errs = [abs(path_loss_db(LinkGeometry(d2d, h_bs, h_ut, fc), los) - expect)
            for d2d, los, h_bs, h_ut, fc, expect, _ in PATH_LOSS_TABLE]
    ok = len(errs) == 10 and max(errs) <= 0.01
    verdict(3, ok, f"{len(errs)} geometries, max |error| = {max(errs):.2e} dB")
    assert ok


def _splits(n, prbs):
    grid = np.array(list(itertools.product(range(prbs + 1), repeat=n)))
    return grid[grid.sum(axis=1) <= prbs]


def test_criterion_4_maxmin_exhaustive(verdict):
    start = time.perf_counter()
    cases = mismatches = 0
    for n in range(1, 5):
        all_splits = _splits(n, 12)
        for prbs in range(0, 13):
            splits = all_splits[all_splits.sum(axis=1) <= prbs]
            for rates in itertools.product((1, 2, 3), repeat=n):
                r = np.array(rates)
                best = int((splits * r).min(axis=1).max())
                alloc = schedule_maxmin(list(range(n)), dict(enumerate(map(float, rates))), prbs)
                got = min(alloc[u] * rates[u] for u in range(n))
                cases += 1
                mismatches += got != best
    elapsed = time.perf_counter() - start
    ok = mismatches == 0 and elapsed < 1.0
    verdict(4, ok, f"{cases} instances, {mismatches} mismatches, {elapsed:.2f}s")
    assert mismatches == 0
    assert elapsed < 1.0


def test_criterion_5_conservation(verdict):
    """Every slot is checked inside the engine; any violation raises."""
    rng = np.random.default_rng(2024)
    slots = violations = 0
    scheds = list(Scheduler)
    runs = 0
    while slots < 10_000:
        spec = ScenarioSpec(seed=int(rng.integers(0, 2**31)), scheduler=scheds[runs % len(scheds)],
                            n_ues=int(rng.integers(20, 400)), n_slots=500, warmup_slots=0,
                            requests_per_slot=int(rng.integers(0, 300)), check_invariants=True)
        sim = Simulation(spec)
        try:
            for _ in range(spec.n_slots):
                sim.step()
            sim.check_queues()
        except Exception:
            violations += 1
        if any(n.compute_used > n.compute_capacity + 1e-9 for n in sim.topology.nodes):
            violations += 1
        slots += spec.n_slots
        runs += 1
    ok = violations == 0
    verdict(5, ok, f"{slots} slots over {runs} randomized runs, {violations} violations")
    assert ok


def test_criterion_6_class_safety(verdict):
    rng = np.random.default_rng(77)
    catalog = default_catalog()
    batches = rt = bad = 0
    for topo_i in range(100):
        topo = build_topology(ScenarioSpec(), np.random.default_rng(topo_i))
        for k in range(10):
            reqs = generate_requests(rng, k, int(rng.integers(1, 400)), topo,
                                     location_constraint_prob=float(rng.random()))
            p = plan(reqs, catalog, topo)
            if len(p.accepted) + len(p.rejected) != len(reqs):
                bad += 1
            for d in p.accepted:
                if d.latency_class is LatencyClass.REAL_TIME:
                    rt += 1
                    bad += d.control_latency_ms + d.inference_latency_ms > 10.0
            apply_plan(topo, p)
            batches += 1
    ok = bad == 0 and batches >= 1000
    verdict(6, ok, f"{batches} batches, {rt} RealTime deployments checked, {bad} violations")
    assert ok


def test_criterion_7_determinism(sweep, tmp_path, verdict):
    out, _, _ = sweep
    name = "OrchestRAN_ues200_seed0.csv"
    runner = CliRunner()
    for d in ("a", "b"):
        res = runner.invoke(main, ["run", "--out", str(tmp_path / d), "--scheduler", "OrchestRAN", "--seed", "0"])
        assert res.exit_code == 0, res.output
    a = (tmp_path / "a" / "reports" / name).read_bytes()
    b = (tmp_path / "b" / "reports" / name).read_bytes()
    parallel = (out / "reports" / name).read_bytes()
    ok = a == b == parallel
    verdict(7, ok, f"two serial runs and one --jobs {JOBS} run of {name}: "
                   f"{'byte-identical' if ok else 'differ'} ({len(a)} bytes)")
    assert ok


def test_criterion_8_channel_statistics(verdict):
    n = 100_000
    p = los_probability(63.0)
    los, _ = draw_los_shadow(np.full(n, p), np.random.default_rng(8))
    frac = los.mean()
    _, shadow = draw_los_shadow(np.zeros(n), np.random.default_rng(9))
    sigma = shadow.std(ddof=1)
    ok = abs(frac - 0.5485) <= 0.01 and abs(sigma - 6.0) <= 0.1
    verdict(8, ok, f"LOS fraction at 63 m = {frac:.4f} (target 0.5485), NLOS shadow sigma = {sigma:.3f} dB")
    assert ok
