"""Site and bond dilution of sampled graphs and spanning-probability curves.

Dilution is coupled across deletion probabilities: every vertex (or edge)
receives one uniform ``u`` and is deleted at probability ``p`` iff ``u < p``.
For one set of uniforms the graph therefore spans for all ``p`` up to a
critical value ``u*``, the largest ``p`` at which the required crossing
survives.  ``u*`` is found with one union-find pass that adds vertices (or
edges) in order of decreasing ``u``; the spanning curve is the empirical
survival function of ``u*`` over configurations and replicates.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .domains import GraphState, build_graph, label_domains
from .kernels import get_backend
from .lattice import Lattice, cut_open, full_region
from .sampler import chain_rng

MODES = ("site", "bond")
DIRECTIONS = ("both", "horizontal", "vertical")
DEFAULT_REPLICATES = 16
DEFAULT_DIRECTION = "both"


@dataclass(frozen=True)
class DilutionSpec:
    mode: str
    p_delete: float = 0.0
    samples: int = DEFAULT_REPLICATES
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.p_delete <= 1.0:
            raise ValueError("p_delete must lie in [0, 1]")
        if self.samples < 1:
            raise ValueError("samples must be positive")


def dilute(graph: GraphState, spec: DilutionSpec, rng: np.random.Generator) -> GraphState:
    """Delete each vertex (site mode) or edge (bond mode) independently with ``spec.p_delete``."""
    if spec.mode == "site":
        keep = rng.random(graph.n_vertices) >= spec.p_delete
        return graph.subgraph_mask(keep)
    keep = rng.random(graph.n_edges) >= spec.p_delete
    return GraphState(
        graph.n_vertices, graph.edges[keep], graph.size, graph.label, graph.decomp, graph.alive
    )


@dataclass
class CrossingProblem:
    """Cut-open graph of one configuration with its boundary flags.

    ``sides_h`` marks vertices touching the left (bit 1) and right (bit 2)
    columns, ``sides_v`` the top and bottom rows.
    """

    graph: GraphState
    indptr: np.ndarray
    indices: np.ndarray
    edges: np.ndarray
    sides_h: np.ndarray
    sides_v: np.ndarray

    @classmethod
    def from_config(cls, lattice: Lattice, config: np.ndarray) -> "CrossingProblem":
        cut = cut_open(lattice)
        graph = build_graph(label_domains(cut, config))
        region = full_region(cut)
        sd = graph.decomp.site_domain
        adj = graph.adjacency
        return cls(
            graph=graph,
            indptr=adj.indptr.astype(np.intc),
            indices=adj.indices.astype(np.intc),
            edges=np.ascontiguousarray(graph.edges, dtype=np.int64),
            sides_h=_side_flags(graph.n_vertices, sd, region.left, region.right),
            sides_v=_side_flags(graph.n_vertices, sd, region.top, region.bottom),
        )

    def critical(self, mode: str, u: np.ndarray, direction: str = DEFAULT_DIRECTION, backend=None) -> float:
        """Largest ``p`` at which deleting the items with ``u < p`` leaves the required crossing(s).

        ``direction="both"`` asks for a horizontal and a vertical crossing at
        once; with coupled deletions that is the smaller of the two values.
        """
        if direction == "both":
            return min(
                self.critical(mode, u, "horizontal", backend),
                self.critical(mode, u, "vertical", backend),
            )
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction!r}")
        sides = self.sides_h if direction == "horizontal" else self.sides_v
        k = get_backend(backend)
        order = np.argsort(-u, kind="stable").astype(np.int64)
        if mode == "site":
            return float(k.critical_site(self.indptr, self.indices, u, order, sides))
        return float(k.critical_bond(self.graph.n_vertices, self.edges, u, order, sides))

    def n_items(self, mode: str) -> int:
        return self.graph.n_vertices if mode == "site" else self.graph.n_edges


def _side_flags(n: int, site_domain: np.ndarray, first: np.ndarray, second: np.ndarray) -> np.ndarray:
    sides = np.zeros(n, dtype=np.int8)
    sides[np.unique(site_domain[first])] |= 1
    sides[np.unique(site_domain[second])] |= 2
    return sides


@dataclass
class PercolationCurve:
    p_delete: np.ndarray
    p_cluster: np.ndarray
    err: np.ndarray
    L: int
    mode: str
    n_samples: int

    def __post_init__(self):
        if np.any(np.diff(self.p_delete) <= 0):
            raise ValueError("p values must be strictly increasing")

    def rows(self) -> list[dict]:
        return [
            {"p_delete": float(p), "p_cluster": float(c), "err": float(e), "L": self.L, "mode": self.mode}
            for p, c, e in zip(self.p_delete, self.p_cluster, self.err)
        ]


def critical_values(
    lattice: Lattice,
    configs: Iterable[np.ndarray],
    mode: str,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    direction: str = DEFAULT_DIRECTION,
    backend=None,
) -> np.ndarray:
    """Critical deletion probability for each (config, replicate) pair, shape ``(n_configs, replicates)``.

    Replicate ``r`` of config ``i`` draws from the sub-stream ``(seed, i, r)``.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    out = []
    for i, cfg in enumerate(configs):
        prob = CrossingProblem.from_config(lattice, cfg)
        row = []
        for r in range(replicates):
            u = chain_rng(seed, i, r).random(prob.n_items(mode))
            row.append(prob.critical(mode, u, direction, backend))
        out.append(row)
    return np.array(out, dtype=float).reshape(-1, replicates)


def curve_from_critical(crit: np.ndarray, grid: Sequence[float], L: int, mode: str) -> PercolationCurve:
    """Spanning fraction ``P(u* >= p)`` on ``grid`` with binomial errors."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty p grid")
    flat = np.asarray(crit, dtype=float).ravel()
    n = flat.size
    pc = np.array([(flat >= p).mean() for p in grid])
    err = np.sqrt(pc * (1 - pc) / n)
    return PercolationCurve(grid, pc, err, L, mode, n)


def spanning_curve(
    lattice: Lattice,
    configs: Iterable[np.ndarray],
    grid: Sequence[float],
    mode: str,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    direction: str = DEFAULT_DIRECTION,
    backend=None,
) -> PercolationCurve:
    """Spanning probability of diluted graphs on the cut-open lattice.

    By default a sample spans when it keeps both a horizontal and a vertical
    crossing; ``direction`` selects a single crossing instead.
    """
    if len(grid) == 0:
        raise ValueError("empty p grid")
    crit = critical_values(lattice, configs, mode, replicates, seed, direction, backend)
    if crit.size == 0:
        raise ValueError("no configurations supplied")
    return curve_from_critical(crit, grid, lattice.L, mode)


@dataclass(frozen=True)
class Threshold:
    p_delete: float
    err: float

    @property
    def p_c(self) -> float:
        """Threshold expressed as the surviving fraction ``1 - p_delete``."""
        return 1.0 - self.p_delete


def estimate_threshold(curve: PercolationCurve, level: float = 0.5) -> Threshold:
    """Linear interpolation at the first downward crossing of ``level``."""
    p, c, e = curve.p_delete, curve.p_cluster, curve.err
    for i in range(len(p)):
        if c[i] == level:
            return Threshold(float(p[i]), float(e[i] * _local_slope_inv(p, c, i)))
        if i + 1 < len(p) and c[i] > level > c[i + 1]:
            h = p[i + 1] - p[i]
            drop = c[i] - c[i + 1]
            x = p[i] + h * (c[i] - level) / drop
            d0 = h * (level - c[i + 1]) / drop**2
            d1 = h * (c[i] - level) / drop**2
            return Threshold(float(x), float(math.hypot(d0 * e[i], d1 * e[i + 1])))
    raise ValueError("spanning curve does not cross 0.5")


def _local_slope_inv(p, c, i) -> float:
    lo, hi = max(i - 1, 0), min(i + 1, len(p) - 1)
    drop = abs(c[lo] - c[hi])
    return (p[hi] - p[lo]) / drop if drop > 0 else 0.0


def write_curve_csv(curves: Sequence[PercolationCurve], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["p_delete", "p_cluster", "err", "L", "mode"], lineterminator="\n")
        w.writeheader()
        for curve in curves:
            for row in curve.rows():
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
