"""Latency, fairness and weighted-sample statistics."""

from __future__ import annotations

import numpy as np

from ..errors import AllZero, ZeroRate


def packet_latency(enqueue_slot: int, dequeue_slot: int, bits: float, rate_bps: float,
                   control_overhead_ms: float, slot_duration_ms: float = 1.0) -> float:
    """Queueing + transmission + control-loop overhead, in milliseconds."""
    if dequeue_slot < enqueue_slot:
        raise ValueError(f"dequeue slot {dequeue_slot} precedes enqueue slot {enqueue_slot}")
    if not rate_bps > 0:
        raise ZeroRate("transmission rate must be positive")
    return (dequeue_slot - enqueue_slot) * slot_duration_ms + bits / rate_bps * 1000.0 + control_overhead_ms


def jain(values) -> float:
    x = np.asarray(values, dtype=float)
    if x.size == 0 or not np.any(x > 0):
        raise AllZero("Jain index needs at least one positive value")
    return float(x.sum() ** 2 / (x.size * np.square(x).sum()))


def weighted_mean_var(values, weights) -> tuple[float, float]:
    """Mean and population variance of samples carrying integer weights."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    total = w.sum()
    if total <= 0:
        return float("nan"), float("nan")
    mean = float(np.dot(v, w) / total)
    var = float(np.dot(w, (v - mean) ** 2) / total)
    return mean, var


def weighted_quantiles(values, weights, qs) -> np.ndarray:
    """Inverted-CDF quantiles: the smallest value whose cumulative weight reaches q."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    qs = np.atleast_1d(np.asarray(qs, dtype=float))
    if v.size == 0 or w.sum() <= 0:
        return np.full(qs.shape, np.nan)
    order = np.argsort(v, kind="stable")
    v, w = v[order], w[order]
    cum = np.cumsum(w)
    idx = np.searchsorted(cum, qs * cum[-1], side="left")
    return v[np.minimum(idx, v.size - 1)]
