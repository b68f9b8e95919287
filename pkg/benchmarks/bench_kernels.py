#!/usr/bin/env python3
"""Compiled vs pure-Python kernels, plus an end-to-end slot-rate comparison.

    python3 benchmarks/bench_kernels.py [--ues 50] [--reps 200] [--slots 200]

Kernel timings call the numba dispatcher and its ``.py_func`` on identical
inputs and assert identical outputs. The end-to-end run re-executes a short
scenario in a subprocess with RANSIM_DISABLE_NUMBA=1.
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from ransim import backend
from ransim.sched import kernels

E2E = """
import time, ransim
from ransim.config import ScenarioSpec, Scheduler
spec = ScenarioSpec(n_slots={slots}, warmup_slots=0, n_ues={ues}, scheduler=Scheduler.{sched},
                    check_invariants=False)
ransim.run(spec.replace(n_slots=2, warmup_slots=0))  # compile outside the timed region
t = time.perf_counter(); ransim.run(spec); print(time.perf_counter() - t)
"""


def _inputs(n, rng):
    bpp = rng.uniform(500.0, 11_000.0, n)
    backlog = rng.integers(0, 20, n) * 12_000.0
    avg = rng.uniform(1e6, 5e7, n)
    return bpp, backlog, avg


def _time(fn, reps):
    fn()  # warm
    t = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t) / reps


def bench_allocators(n_ues, reps):
    rng = np.random.default_rng(7)
    bpp, backlog, avg = _inputs(n_ues, rng)
    w = np.ones(n_ues)
    cases = {
        "rr_allocate": lambda f, out: f(bpp, backlog, 264, 0, out),
        "pf_allocate": lambda f, out: f(bpp, backlog, avg, w, 264, 1e-3, 0.01, out),
        "maxmin_allocate": lambda f, out: f(bpp, backlog, 264, out),
        "greedy_allocate": lambda f, out: f(bpp, backlog, 264, out),
    }
    print(f"\n=== allocators ({n_ues} UEs, 264 PRBs, {reps} reps) ===")
    for name, call in cases.items():
        jitted = getattr(kernels, name)
        pure = getattr(jitted, "py_func", jitted)
        out_j = np.zeros(n_ues, dtype=np.int64)
        out_p = np.zeros(n_ues, dtype=np.int64)
        call(jitted, out_j)
        call(pure, out_p)
        assert np.array_equal(out_j, out_p), name
        tj = _time(lambda: call(jitted, np.zeros(n_ues, dtype=np.int64)), reps)
        tp = _time(lambda: call(pure, np.zeros(n_ues, dtype=np.int64)), max(reps // 20, 3))
        print(f"{name:16s} numba {tj * 1e6:9.1f} us   python {tp * 1e6:11.1f} us   x{tp / tj:7.1f}")


def bench_e2e(n_ues, slots, sched):
    print(f"\n=== end to end ({n_ues} UEs, {slots} slots, {sched}) ===")
    code = E2E.format(slots=slots, ues=n_ues, sched=sched)
    res = {}
    for label, flag in (("numba", "0"), ("python", "1")):
        env = dict(os.environ, RANSIM_DISABLE_NUMBA=flag)
        out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        res[label] = float(out.stdout.strip().splitlines()[-1])
        print(f"{label:7s} {res[label]:8.2f} s   {res[label] / slots * 1e3:8.2f} ms/slot")
    print(f"speedup x{res['python'] / res['numba']:.1f}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ues", type=int, default=50)
    ap.add_argument("--reps", type=int, default=200)
    ap.add_argument("--slots", type=int, default=200)
    ap.add_argument("--e2e-ues", type=int, default=200)
    ap.add_argument("--scheduler", default="PROPORTIONAL_FAIR")
    args = ap.parse_args()
    if backend() != "numba":
        sys.exit("numba is disabled or missing; unset RANSIM_DISABLE_NUMBA to benchmark")
    bench_allocators(args.ues, args.reps)
    bench_e2e(args.e2e_ues, args.slots, args.scheduler)


if __name__ == "__main__":
    main()
