"""Time the compiled and pure-numpy RK4 kernels on the same network runs.

    python3 benchmarks/bench_rk4.py [--nodes 10] [--steps 20000] [--repeat 3]

The numba timings exclude the one-off compile, which is triggered (or loaded
from cache) by a warm-up call before measurement.
"""
import argparse
import time

import numpy as np

from semipassive import _kernels
from semipassive.generators import random_spanning_tree_digraph
from semipassive.simulator import NetworkSystem, simulate


def best_of(kernel, sys_, x0, steps, repeat):
    dt = 1e-3
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        traj = simulate(sys_, x0, steps * dt, dt, record_every=100, kernel=kernel)
        times.append(time.perf_counter() - t0)
    return min(times), traj


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=10)
    ap.add_argument("--steps", type=int, default=20_000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _kernels.rk4_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(args.seed)
    g = random_spanning_tree_digraph(rng, args.nodes)
    print(f"{'model':<14}{'numpy s':>10}{'numba s':>10}{'speedup':>9}{'max diff':>11}")
    for model in ("cubic", "lorenz"):
        sys_ = NetworkSystem.from_graph(g, model)
        x0 = rng.uniform(-10, 10, sys_.size)
        simulate(sys_, x0, 0.01, 1e-3, kernel=_kernels.rk4_numba)  # compile / load cache
        t_np, a = best_of(_kernels.rk4_numpy, sys_, x0, args.steps, args.repeat)
        t_nb, b = best_of(_kernels.rk4_numba, sys_, x0, args.steps, args.repeat)
        diff = float(np.abs(a.states - b.states).max())
        print(f"{model:<14}{t_np:>10.3f}{t_nb:>10.3f}{t_np / t_nb:>8.1f}x{diff:>11.1e}")


if __name__ == "__main__":
    main()
