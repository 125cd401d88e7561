"""Time the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--L 40] [--sweeps 20] [--repeat 3]

Both backends run the same sweeps on the same inputs; the script also
checks that their outputs agree exactly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from aklt_graphs.kernels import HAVE_COMPILED, get_backend
from aklt_graphs.lattice import build_lattice
from aklt_graphs.percolation import CrossingProblem
from aklt_graphs.sampler import ChainParams, Chain


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_metropolis(L, sweeps, repeat):
    lat = build_lattice("honeycomb", L, "periodic")
    chain = Chain(lat, ChainParams(seed=1, warmup=0))
    nbr = chain.nbr
    rng = np.random.default_rng(7)
    n = lat.n_sites
    draws = [
        (rng.integers(0, n, n, dtype=np.int64), rng.integers(1, 3, n, dtype=np.int8), rng.random(n))
        for _ in range(sweeps)
    ]

    def run(name):
        k = get_backend(name)
        cfg = chain.config.copy()

        def go():
            c = cfg.copy()
            acc = 0
            for sites, shifts, u in draws:
                acc += int(k.metropolis_sweeps(c, nbr, sites, shifts, u, False))
            return acc, c

        return _best(go, repeat)

    return run


def bench_critical(L, reps, repeat):
    lat = build_lattice("honeycomb", L, "periodic")
    chain = Chain(lat, ChainParams(seed=2, warmup=0))
    chain.sweep(50)
    prob = CrossingProblem.from_config(lat, chain.config)
    rng = np.random.default_rng(3)
    us = [rng.random(prob.n_items("bond")) for _ in range(reps)]
    vs = [rng.random(prob.n_items("site")) for _ in range(reps)]

    def run(name):
        def go():
            return [prob.critical("bond", u, "horizontal", name) for u in us] + [
                prob.critical("site", v, "horizontal", name) for v in vs
            ]

        return _best(go, repeat)

    return run


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--L", type=int, default=40)
    ap.add_argument("--sweeps", type=int, default=20)
    ap.add_argument("--replicates", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    if not HAVE_COMPILED:
        print("compiled kernels are not built; only the Python fallback is available")
    backends = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    print(f"{'kernel':<22}{'backend':<10}{'seconds':>10}{'speed-up':>10}")
    for label, make in (
        (f"metropolis L={args.L}", bench_metropolis(args.L, args.sweeps, args.repeat)),
        (f"critical L={args.L}", bench_critical(args.L, args.replicates, args.repeat)),
    ):
        results = {b: make(b) for b in backends}
        base = results["python"][0]
        for b in backends:
            t, _ = results[b]
            print(f"{label:<22}{b:<10}{t:>10.4f}{base / t:>9.1f}x")
        if len(backends) == 2:
            a, c = results["python"][1], results["compiled"][1]
            same = (a[0] == c[0] and np.array_equal(a[1], c[1])) if isinstance(a, tuple) else a == c
            print(f"{'':<22}outputs identical: {same}")


if __name__ == "__main__":
    main()
