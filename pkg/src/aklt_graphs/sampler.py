"""Single-site Metropolis sampling of outcome configurations.

The stationary distribution is proportional to ``2 ** (|V| - |E_pre|)``.  A
proposal picks a site uniformly, switches its label to one of the two other
labels with equal probability and accepts with ``min(1, 2 ** delta)``.

Randomness
----------
All random numbers come from numpy's ``PCG64`` bit generator.  A chain seeded
with ``seed`` uses ``SeedSequence(seed, spawn_key=key)``; the CLI derives the
key as ``(subcommand, chain)`` (see :func:`chain_rng`).  For every sweep the
chain draws, in this order, ``N`` site indices (``integers(0, N)``), ``N``
label shifts (``integers(1, 3)``) and ``N`` uniforms (``random()``), so the
compiled and pure-Python backends see identical streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from .domains import label_domains, log2_weight
from .kernels import get_backend
from .lattice import Lattice

DEFAULT_WARMUP = 1000
DEFAULT_INTERVAL = 10


@dataclass(frozen=True)
class ChainParams:
    """Run-length and seeding parameters of one Markov chain."""

    seed: int
    warmup: int = DEFAULT_WARMUP
    sweeps: int = 1000
    interval: int = DEFAULT_INTERVAL
    initial: str = "uniform"
    config: np.ndarray | None = field(default=None, compare=False)
    spawn_key: tuple[int, ...] = ()

    def __post_init__(self):
        if self.warmup < 0:
            raise ValueError("warmup must be non-negative")
        if self.interval < 1:
            raise ValueError("interval must be at least 1")
        if self.sweeps < 0:
            raise ValueError("sweeps must be non-negative")
        if self.initial not in ("uniform", "given"):
            raise ValueError(f"unknown initial mode {self.initial!r}")
        if self.initial == "given" and self.config is None:
            raise ValueError("initial='given' needs a config")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass
class Sample:
    sweep: int
    config: np.ndarray | None = None
    summary: object = None


@dataclass
class SampleStream:
    """Recorded samples of one chain, in sweep order."""

    lattice: Lattice
    params: ChainParams
    samples: list[Sample]
    accepted: int = 0
    proposed: int = 0

    @property
    def acceptance(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)


def chain_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """Independent ``PCG64`` sub-stream for the given spawn key."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key)))


def delta_log2_weight(lattice: Lattice, config: np.ndarray, site: int, new_label: int) -> int | None:
    """Exponent change of a single-site relabelling by full recount (reference path).

    Returns ``None`` when the proposed configuration has zero weight.
    """
    before = log2_weight(label_domains(lattice, config))
    trial = config.copy()
    trial[site] = new_label
    after = log2_weight(label_domains(lattice, trial))
    if after is None:
        return None
    return after - before


def acceptance_probability(delta: int | None) -> float:
    """``min(1, 2 ** delta)``; zero-weight proposals (``None``) are never accepted."""
    if delta is None:
        return 0.0
    return 1.0 if delta >= 0 else float(np.ldexp(1.0, delta))


def propose_and_accept(
    lattice: Lattice, config: np.ndarray, site: int, rng: np.random.Generator
) -> tuple[np.ndarray, bool]:
    """One Metropolis step at ``site`` using full relabelling; returns (config, accepted)."""
    shift = int(rng.integers(1, 3))
    u = float(rng.random())
    new_label = (int(config[site]) + shift) % 3
    p = acceptance_probability(delta_log2_weight(lattice, config, site, new_label))
    if u < p:
        out = config.copy()
        out[site] = new_label
        return out, True
    return config, False


def initial_config(lattice: Lattice, params: ChainParams, rng: np.random.Generator) -> np.ndarray:
    if params.initial == "given":
        config = np.array(params.config, dtype=np.int8)
        if config.shape != (lattice.n_sites,):
            raise ValueError("given config does not match the lattice")
        if log2_weight(label_domains(lattice, config)) is None:
            raise ValueError("given config has zero weight")
        return config
    while True:
        config = rng.integers(0, 3, size=lattice.n_sites).astype(np.int8)
        if log2_weight(label_domains(lattice, config)) is not None:
            return config


class Chain:
    """Stateful Metropolis chain; ``sweep(k)`` advances ``k`` sweeps."""

    def __init__(self, lattice: Lattice, params: ChainParams, backend: str | None = None):
        self.lattice = lattice
        self.params = params
        self.kernels = get_backend(backend)
        self.rng = chain_rng(params.seed, *params.spawn_key)
        self.config = initial_config(lattice, params, self.rng)
        self.nbr = np.ascontiguousarray(lattice.neighbors, dtype=np.intc)
        self.check_parity = not lattice.bipartite
        self.sweeps_done = 0
        self.accepted = 0
        self.proposed = 0

    def sweep(self, count: int = 1) -> None:
        n = self.lattice.n_sites
        for _ in range(count):
            sites = self.rng.integers(0, n, size=n, dtype=np.int64)
            shifts = self.rng.integers(1, 3, size=n, dtype=np.int8)
            uniforms = self.rng.random(n)
            self.accepted += int(
                self.kernels.metropolis_sweeps(
                    self.config, self.nbr, sites, shifts, uniforms, self.check_parity
                )
            )
            self.proposed += n
            self.sweeps_done += 1


def iter_chain(
    lattice: Lattice,
    params: ChainParams,
    summarize: Callable[[Lattice, np.ndarray], object] | None = None,
    keep_config: bool = True,
    backend: str | None = None,
) -> Iterator[Sample]:
    """Yield a sample every ``interval`` sweeps after ``warmup`` sweeps."""
    chain = Chain(lattice, params, backend=backend)
    chain.sweep(params.warmup)
    for k in range(params.sweeps // params.interval):
        chain.sweep(params.interval)
        cfg = chain.config.copy()
        yield Sample(
            sweep=chain.sweeps_done,
            config=cfg if keep_config else None,
            summary=summarize(lattice, cfg) if summarize else None,
        )


def run_chain(
    lattice: Lattice,
    params: ChainParams,
    summarize: Callable[[Lattice, np.ndarray], object] | None = None,
    keep_config: bool = True,
    backend: str | None = None,
) -> SampleStream:
    """Run a chain to completion and collect its samples.

    ``params.sweeps`` counts measurement sweeps after warm-up; a sample is
    recorded every ``params.interval`` of them.
    """
    chain = Chain(lattice, params, backend=backend)
    chain.sweep(params.warmup)
    samples = []
    for _ in range(params.sweeps // params.interval):
        chain.sweep(params.interval)
        cfg = chain.config.copy()
        samples.append(
            Sample(
                sweep=chain.sweeps_done,
                config=cfg if keep_config else None,
                summary=summarize(lattice, cfg) if summarize else None,
            )
        )
    return SampleStream(lattice, params, samples, chain.accepted, chain.proposed)
