"""Per-PRB allocation loops and packet-queue bookkeeping.

These run every slot for every DU, so they are compiled with numba when
available (see ``ransim._accel``). Arrays in, arrays out; no Python objects.

Conventions shared by the allocators:
  bpp      bits one PRB carries for each UE this slot (float64)
  backlog  queued bits per UE (float64, may be inf for full-buffer tests)
  out      PRB counts per UE (int64), updated in place and possibly
           pre-filled by an earlier allocator in a blended policy
A UE competes for a PRB while it is backlogged, can carry at least one bit
per PRB, and its provisional grant does not yet cover its backlog.
"""

import math

import numpy as np

from .._accel import jit

MIN_BITS_PER_PRB = 1.0


@jit
def wants_more(prbs, bpp, backlog):
    return backlog > 0.0 and bpp >= MIN_BITS_PER_PRB and math.floor(prbs * bpp) < backlog


@jit
def rr_allocate(bpp, backlog, n_prbs, cursor, out):
    """Deal PRBs one at a time cycling from ``cursor``; returns the new cursor."""
    n = bpp.shape[0]
    if n == 0:
        return cursor
    pos = cursor % n
    last = -1
    for _ in range(n_prbs):
        found = -1
        for k in range(n):
            i = (pos + k) % n
            if wants_more(out[i], bpp[i], backlog[i]):
                found = i
                break
        if found < 0:
            break
        out[found] += 1
        last = found
        pos = (found + 1) % n
    if last < 0:
        return cursor
    return (last + 1) % n


@jit
def pf_allocate(bpp, backlog, avg_bps, weight, n_prbs, slot_s, inv_tc, out):
    """Weighted proportional fair with within-slot provisional averages.

    Metric per PRB: weight * r / R', where r is the per-PRB rate and R' the
    EWMA average updated as if the slot ended with the grants made so far.
    """
    n = bpp.shape[0]
    keep = 1.0 - inv_tc
    for _ in range(n_prbs):
        best = -1
        best_m = -1.0
        for i in range(n):
            if not wants_more(out[i], bpp[i], backlog[i]):
                continue
            r = bpp[i] / slot_s
            avg = keep * avg_bps[i] + inv_tc * (out[i] * bpp[i] / slot_s)
            m = weight[i] * r / avg
            if m > best_m:
                best_m = m
                best = i
        if best < 0:
            break
        out[best] += 1


@jit
def maxmin_allocate(bpp, backlog, n_prbs, out):
    """Integer progressive filling: each PRB goes to the lowest provisional throughput."""
    n = bpp.shape[0]
    for _ in range(n_prbs):
        best = -1
        best_t = np.inf
        for i in range(n):
            if not wants_more(out[i], bpp[i], backlog[i]):
                continue
            t = out[i] * bpp[i]
            if t < best_t:
                best_t = t
                best = i
        if best < 0:
            break
        out[best] += 1


@jit
def greedy_allocate(bpp, backlog, n_prbs, out):
    """Max-rate: each PRB goes to the unsatisfied UE with the highest per-PRB rate."""
    n = bpp.shape[0]
    for _ in range(n_prbs):
        best = -1
        best_r = -1.0
        for i in range(n):
            if not wants_more(out[i], bpp[i], backlog[i]):
                continue
            if bpp[i] > best_r:
                best_r = bpp[i]
                best = i
        if best < 0:
            break
        out[best] += 1


@jit
def push_arrivals(q_slot, q_count, head, tail, front_rem, counts, slot, packet_bits):
    """Append one batch per UE holding this slot's packet arrivals."""
    cap = q_slot.shape[1]
    for u in range(counts.shape[0]):
        c = counts[u]
        if c == 0:
            continue
        t = tail[u]
        if head[u] == t:
            front_rem[u] = packet_bits
        q_slot[u, t] = slot
        q_count[u, t] = c
        t = (t + 1) % cap
        if t == head[u]:
            raise RuntimeError("packet queue ring buffer overflow")
        tail[u] = t


@jit
def drain_queues(q_slot, q_count, head, tail, front_rem, served, rate_bps, overhead_ms,
                 slot, slot_ms, packet_bits, lat_out, w_out):
    """Remove ``served`` bits FIFO from each queue and emit completed-packet latencies.

    Packets of one batch completing together share a latency, so they are
    emitted as one sample with a packet-count weight. Returns the number of
    samples written to ``lat_out``/``w_out``.
    """
    cap = q_slot.shape[1]
    ns = 0
    for u in range(served.shape[0]):
        bits = served[u]
        if bits <= 0:
            continue
        tx_ms = packet_bits / rate_bps[u] * 1000.0
        while bits > 0 and head[u] != tail[u]:
            h = head[u]
            done = 0
            if bits >= front_rem[u]:
                bits -= front_rem[u]
                done = 1
                more = min(q_count[u, h] - 1, bits // packet_bits)
                done += more
                bits -= more * packet_bits
                q_count[u, h] -= done
                lat_out[ns] = (slot - q_slot[u, h]) * slot_ms + tx_ms + overhead_ms[u]
                w_out[ns] = done
                ns += 1
                if q_count[u, h] == 0:
                    head[u] = (h + 1) % cap
                    front_rem[u] = packet_bits
                else:
                    front_rem[u] = packet_bits - bits
                    bits = 0
            else:
                front_rem[u] -= bits
                bits = 0
    return ns


@jit
def queued_bits(q_count, head, tail, front_rem, packet_bits, out):
    cap = q_count.shape[1]
    for u in range(head.shape[0]):
        total = 0
        h = head[u]
        first = True
        while h != tail[u]:
            if first:
                total += front_rem[u] + (q_count[u, h] - 1) * packet_bits
                first = False
            else:
                total += q_count[u, h] * packet_bits
            h = (h + 1) % cap
        out[u] = total


@jit
def head_of_line_ms(q_slot, head, tail, slot, slot_ms, out):
    for u in range(head.shape[0]):
        if head[u] == tail[u]:
            out[u] = 0.0
        else:
            out[u] = (slot - q_slot[u, head[u]]) * slot_ms
