"""Run reports, CSV writers and cross-scheduler comparison."""

from __future__ import annotations

import csv
import io
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..config import ScenarioSpec, to_toml
from ..errors import IncomparableSpecs
from .metrics import weighted_mean_var, weighted_quantiles

SLOT_COLUMNS = ("slot", "scheduler", "mean_se", "p50_latency_ms", "p95_latency_ms", "jain", "rejected",
                "prbs_used", "served_bits", "backlog_bits")

AGGREGATE_KEYS = ("mean_latency_ms", "p50_latency_ms", "p95_latency_ms", "p99_latency_ms", "latency_var_ms2",
                  "mean_se", "jain", "throughput_bps", "rejected", "completed_packets",
                  "queued_packets", "mean_latency_with_queued_ms")


@dataclass
class SimulationReport:
    """Everything a run recorded. Aggregates are derived, never stored independently."""

    spec: ScenarioSpec
    ue_ids: np.ndarray
    mean_se: np.ndarray          # per slot, NaN when no PRB was used
    jain: np.ndarray             # per slot, NaN when nothing was served
    rejected: np.ndarray         # per slot
    prbs_used: np.ndarray
    arrived_bits: np.ndarray
    served_bits: np.ndarray      # (slot, ue)
    backlog_bits: np.ndarray
    actions: np.ndarray          # (slot, du) preset index, -1 when no agent acted
    lat_slot: np.ndarray         # completion slot of each latency sample
    lat_ms: np.ndarray
    lat_w: np.ndarray            # packets represented by each sample
    queued_age_ms: np.ndarray = field(default_factory=lambda: np.zeros(0))
    queued_count: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    deployments: list = field(default_factory=list)
    wall_clock_s: float = 0.0
    aggregates: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.aggregates:
            self.aggregates = self.recompute_aggregates()

    @property
    def scheduler(self) -> str:
        return self.spec.scheduler.value

    @property
    def measured(self) -> slice:
        return slice(self.spec.warmup_slots, self.spec.n_slots)

    def latency_samples(self) -> tuple[np.ndarray, np.ndarray]:
        """(latency_ms, weight) of packets completed inside the measurement window."""
        keep = self.lat_slot >= self.spec.warmup_slots
        return self.lat_ms[keep], self.lat_w[keep]

    def recompute_aggregates(self) -> dict:
        lat, w = self.latency_samples()
        mean, var = weighted_mean_var(lat, w)
        p50, p95, p99 = weighted_quantiles(lat, w, (0.50, 0.95, 0.99))
        win = self.measured
        per_ue = self.served_bits[win].sum(axis=0).astype(float)
        jain = float(per_ue.sum() ** 2 / (per_ue.size * np.square(per_ue).sum())) if np.any(per_ue > 0) else float("nan")
        se = self.mean_se[win]
        n_win = win.stop - win.start
        slot_s = self.spec.slot_duration_ms / 1000.0
        # packets still queued at the end have waited at least their current age
        all_lat = np.concatenate([lat, self.queued_age_ms])
        all_w = np.concatenate([w, self.queued_count])
        mean_all, _ = weighted_mean_var(all_lat, all_w)
        return {
            "mean_latency_ms": mean,
            "p50_latency_ms": float(p50),
            "p95_latency_ms": float(p95),
            "p99_latency_ms": float(p99),
            "latency_var_ms2": var,
            "mean_se": float(np.nanmean(se)) if np.any(~np.isnan(se)) else float("nan"),
            "jain": jain,
            "throughput_bps": float(per_ue.sum() / (n_win * slot_s)),
            "rejected": int(self.rejected.sum()),
            "completed_packets": int(w.sum()),
            "queued_packets": int(self.queued_count.sum()),
            "mean_latency_with_queued_ms": mean_all,
        }

    def check_consistency(self, rtol: float = 1e-12) -> None:
        """Raise AssertionError if stored aggregates drift from the per-slot records."""
        fresh = self.recompute_aggregates()
        for k, v in self.aggregates.items():
            a, b = float(v), float(fresh[k])
            if np.isnan(a) and np.isnan(b):
                continue
            if not abs(a - b) <= rtol * max(abs(a), abs(b)):
                raise AssertionError(f"aggregate {k}: stored {a!r} != recomputed {b!r}")

    # per-slot table ------------------------------------------------------

    def slot_rows(self) -> list[tuple]:
        n = self.spec.n_slots
        bounds = np.searchsorted(self.lat_slot, np.arange(n + 1), side="left")
        served = self.served_bits.sum(axis=1)
        rows = []
        for t in range(n):
            a, b = bounds[t], bounds[t + 1]
            if b > a:
                p50, p95 = weighted_quantiles(self.lat_ms[a:b], self.lat_w[a:b], (0.5, 0.95))
            else:
                p50 = p95 = float("nan")
            rows.append((t, self.scheduler, float(self.mean_se[t]), float(p50), float(p95), float(self.jain[t]),
                         int(self.rejected[t]), int(self.prbs_used[t]), int(served[t]), int(self.backlog_bits[t])))
        return rows

    def header(self) -> str:
        lines = ["effective scenario (TOML)"] + to_toml(self.spec).splitlines()
        lines.append("measurement window: slots %d..%d" % (self.spec.warmup_slots, self.spec.n_slots - 1))
        return "".join(f"# {ln}\n" if ln else "#\n" for ln in lines)

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(self.header())
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(SLOT_COLUMNS)
        for row in self.slot_rows():
            w.writerow([_fmt(x) for x in row])
        return buf.getvalue()

    def write_csv(self, path) -> Path:
        return atomic_write(path, self.to_csv())

    def deployments_csv(self) -> str:
        from ..orchestrator import PLAN_COLUMNS

        buf = io.StringIO()
        buf.write(self.header())
        w = csv.DictWriter(buf, fieldnames=PLAN_COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in self.deployments:
            w.writerow({k: _fmt(v) for k, v in row.items()})
        return buf.getvalue()

    def latency_cdf(self, points: int = 200) -> tuple[np.ndarray, np.ndarray]:
        lat, w = self.latency_samples()
        qs = np.linspace(0.0, 1.0, points + 1)[1:]
        return weighted_quantiles(lat, w, qs), qs


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return "" if np.isnan(x) else repr(x)
    return str(x)


def atomic_write(path, text: str) -> Path:
    """Write via a temp file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


# comparison --------------------------------------------------------------

COMPARE_KEYS = ("mean_se", "mean_latency_ms", "p50_latency_ms", "p95_latency_ms", "p99_latency_ms",
                "latency_var_ms2", "jain", "rejected")


@dataclass(frozen=True)
class ComparisonTable:
    """Seed-averaged aggregates per scheduler plus pairwise deltas."""

    rows: dict            # scheduler -> {metric: seed mean, "n_runs": k}
    pairwise: list        # dicts: a, b, se_gain_pct, latency_delta_ms, latency_var_delta
    n_ues: int
    seeds: tuple

    def gain(self, a: str, b: str) -> float:
        for p in self.pairwise:
            if p["a"] == a and p["b"] == b:
                return p["se_gain_pct"]
        raise KeyError((a, b))

    def to_csv(self, header: str = "") -> str:
        buf = io.StringIO()
        buf.write(header)
        buf.write(f"# n_ues = {self.n_ues}; seeds = {','.join(map(str, self.seeds))}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("scheduler", "n_runs") + COMPARE_KEYS)
        for s, r in self.rows.items():
            w.writerow([s, r["n_runs"]] + [_fmt(float(r[k])) for k in COMPARE_KEYS])
        w.writerow(())
        w.writerow(("a", "b", "se_gain_pct", "latency_delta_ms", "latency_var_delta_ms2"))
        for p in self.pairwise:
            w.writerow([p["a"], p["b"], _fmt(p["se_gain_pct"]), _fmt(p["latency_delta_ms"]),
                        _fmt(p["latency_var_delta_ms2"])])
        return buf.getvalue()


def compare(reports: list[SimulationReport]) -> ComparisonTable:
    """Average each scheduler's runs over seeds and tabulate pairwise differences.

    All reports must share every scenario parameter apart from scheduler and
    seed, and every scheduler must cover the same seed set.
    """
    if len(reports) < 2:
        raise IncomparableSpecs("need at least two reports")
    key = reports[0].spec.scenario_key()
    for r in reports[1:]:
        if r.spec.scenario_key() != key:
            raise IncomparableSpecs("reports differ in scenario parameters other than scheduler and seed")
    by_sched: dict[str, list[SimulationReport]] = {}
    for r in reports:
        by_sched.setdefault(r.scheduler, []).append(r)
    seed_sets = {s: sorted(r.spec.seed for r in rs) for s, rs in by_sched.items()}
    first = next(iter(seed_sets.values()))
    if any(v != first for v in seed_sets.values()):
        raise IncomparableSpecs(f"schedulers cover different seeds: {seed_sets}")

    rows = {}
    for s in sorted(by_sched):
        rs = by_sched[s]
        rows[s] = {k: float(np.mean([r.aggregates[k] for r in rs])) for k in COMPARE_KEYS}
        rows[s]["n_runs"] = len(rs)
    pairwise = []
    for a in rows:
        for b in rows:
            if a == b and len(rows) > 1:
                continue
            ra, rb = rows[a], rows[b]
            pairwise.append({
                "a": a, "b": b,
                "se_gain_pct": 100.0 * (ra["mean_se"] - rb["mean_se"]) / rb["mean_se"],
                "latency_delta_ms": ra["mean_latency_ms"] - rb["mean_latency_ms"],
                "latency_var_delta_ms2": ra["latency_var_ms2"] - rb["latency_var_ms2"],
            })
    return ComparisonTable(rows, pairwise, reports[0].spec.n_ues, tuple(first))


def load_curves(reports: list[SimulationReport], metrics=("mean_se", "mean_latency_ms")) -> dict:
    """{metric: {scheduler: [(n_ues, seed-mean value), ...]}} for load-sweep plots."""
    acc: dict = {}
    for r in reports:
        for m in metrics:
            acc.setdefault(m, {}).setdefault(r.scheduler, {}).setdefault(r.spec.n_ues, []).append(r.aggregates[m])
    return {m: {s: sorted((n, float(np.mean(v))) for n, v in pts.items()) for s, pts in per.items()}
            for m, per in acc.items()}


def series_csv(curves: dict, x_name: str, y_name: str) -> str:
    """Long-format plot data: one row per (curve, x, y)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("curve", x_name, y_name))
    for name in sorted(curves):
        for x, y in curves[name]:
            w.writerow((name, _fmt(x), _fmt(y)))
    return buf.getvalue()
