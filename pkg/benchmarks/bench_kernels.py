#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--ticks N]

Times the per-tick world step and the window tally in isolation, then
a full learning episode end to end (where non-kernel Python work
dilutes the speedup).
"""

import argparse
import random
import time

from honeysim import config as config_mod
from honeysim._kernels import get_backend
from honeysim.agent import QTable
from honeysim.harness import QPolicy, make_catalog, run_scenario
from honeysim.world import EventKind, WorldEvent, init_world, step_world


def bench_step(backend: str, ticks: int) -> float:
    cfg = config_mod.from_mapping({"world": {
        "honeypot": {"count": 2, "cost": 10},
        "campaigns": [{"id": "apt-0", "intensity": 0.7},
                      {"id": "apt-1", "intensity": 0.4, "activation_tick": 100}],
    }})
    world = init_world(cfg, 42, backend=backend)
    start = time.perf_counter()
    for _ in range(ticks):
        step_world(world)
    return time.perf_counter() - start


def bench_tally(backend: str, repeats: int) -> float:
    rng = random.Random(7)
    kinds = list(EventKind)
    events = [WorldEvent(t, rng.choice(kinds), "n", rng.randint(1, 5),
                         rng.random(), False) for t in range(60)]
    tally = get_backend(backend).tally
    start = time.perf_counter()
    for _ in range(repeats):
        tally(events)
    return time.perf_counter() - start


def bench_episode(backend: str, ticks: int) -> float:
    cfg = config_mod.from_mapping({"episode_ticks": ticks})
    qtable = QTable(make_catalog(cfg).selectable_ids)
    start = time.perf_counter()
    run_scenario(cfg, 42, QPolicy(qtable, epsilon=0.2), learn=True,
                 backend=backend, with_trace=False)
    return time.perf_counter() - start


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--ticks", type=int, default=20000)
    args = parser.parse_args()

    backends = ["pure"]
    try:
        get_backend("compiled")
        backends.append("compiled")
    except ImportError:
        print("compiled extension not built; benchmarking pure only")

    rows = []
    for name, fn, scale in (
            (f"world step x{args.ticks}", bench_step, args.ticks),
            ("window tally x100000", bench_tally, 100_000),
            ("learning episode (2000 ticks)", bench_episode, 2000)):
        times = {b: fn(b, scale) for b in backends}
        rows.append((name, times))

    width = max(len(r[0]) for r in rows) + 2
    header = f"{'benchmark':<{width}}" + "".join(f"{b:>12}" for b in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name, times in rows:
        line = f"{name:<{width}}" + "".join(f"{times[b]:>11.3f}s" for b in backends)
        if len(backends) == 2:
            line += f"{times['pure'] / times['compiled']:>9.2f}x"
        print(line)


if __name__ == "__main__":
    main()
