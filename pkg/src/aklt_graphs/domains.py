"""Domain decomposition of POVM outcome configurations and the resulting graph.

A configuration assigns one of the labels ``X, Y, Z`` (stored as ``0, 1, 2``)
to each site.  Bonds joining equal labels are contracted, giving *domains*;
bonds joining different labels survive as inter-domain edges, and the logical
graph keeps an edge between two domains iff the number of such bonds is odd.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .lattice import Lattice

LABELS = "XYZ"


def parse_config(text: str) -> np.ndarray:
    """``"XZY..."`` (or base-3 digits ``"021..."``) to an int8 label array."""
    table = {"X": 0, "Y": 1, "Z": 2, "0": 0, "1": 1, "2": 2}
    try:
        return np.array([table[ch] for ch in text.strip().upper()], dtype=np.int8)
    except KeyError as exc:
        raise ValueError(f"invalid outcome label {exc.args[0]!r}") from None


def format_config(config: np.ndarray, digits: bool = True) -> str:
    """Compact base-3 string (``digits=True``) or letter string."""
    alphabet = "012" if digits else LABELS
    return "".join(alphabet[int(a)] for a in config)


def check_config(lattice: Lattice, config: np.ndarray) -> np.ndarray:
    config = np.asarray(config)
    if config.shape != (lattice.n_sites,):
        raise ValueError(f"config has shape {config.shape}, lattice has {lattice.n_sites} sites")
    if config.size and (config.min() < 0 or config.max() > 2):
        raise ValueError("labels must be 0, 1 or 2")
    return config.astype(np.int8, copy=False)


@dataclass(eq=False)
class DomainDecomposition:
    """Partition of the sites into maximal same-label connected sets.

    Domain ids are dense, ``0 .. n_domains - 1``, ordered by each domain's
    smallest member site, which is available as ``root``.
    """

    lattice: Lattice
    config: np.ndarray
    site_domain: np.ndarray
    root: np.ndarray
    label: np.ndarray
    size: np.ndarray
    internal_edges: np.ndarray
    pairs: np.ndarray
    multiplicity: np.ndarray
    odd_cycle: bool = False

    @property
    def n_domains(self) -> int:
        return len(self.root)

    @property
    def n_inter(self) -> int:
        """Inter-domain bond count before the mod-2 reduction."""
        return int(self.multiplicity.sum())

    @cached_property
    def _order(self):
        order = np.argsort(self.site_domain, kind="stable")
        bounds = np.concatenate([[0], np.cumsum(self.size)])
        return order, bounds

    def members(self, d: int) -> np.ndarray:
        order, bounds = self._order
        return order[bounds[d] : bounds[d + 1]]

    def domain_sites(self) -> list[np.ndarray]:
        order, bounds = self._order
        return [order[bounds[d] : bounds[d + 1]] for d in range(self.n_domains)]

    def domain_bonds(self, d: int) -> np.ndarray:
        """Lattice bonds internal to domain ``d`` (site indices, multigraph)."""
        e = self.lattice.edges
        sd = self.site_domain
        mask = (sd[e[:, 0]] == d) & (sd[e[:, 1]] == d)
        return e[mask]


def label_domains(lattice: Lattice, config: np.ndarray) -> DomainDecomposition:
    """Connected-component labelling over same-label bonds."""
    config = check_config(lattice, config)
    n = lattice.n_sites
    e = lattice.edges
    same = config[e[:, 0]] == config[e[:, 1]]
    se = e[same]
    adj = coo_matrix(
        (np.ones(len(se), dtype=np.int8), (se[:, 0], se[:, 1])), shape=(n, n)
    ).tocsr()
    _, comp = connected_components(adj, directed=False)
    # renumber by smallest member site
    _, first = np.unique(comp, return_index=True)
    order = np.argsort(first)
    relabel = np.empty(len(first), dtype=np.int64)
    relabel[order] = np.arange(len(first))
    site_domain = relabel[comp]
    root = np.sort(first)
    n_dom = len(root)

    size = np.bincount(site_domain, minlength=n_dom)
    internal = np.bincount(site_domain[se[:, 0]], minlength=n_dom)
    inter = e[~same]
    da = site_domain[inter[:, 0]]
    db = site_domain[inter[:, 1]]
    lo, hi = np.minimum(da, db), np.maximum(da, db)
    if len(lo):
        keys = lo * n_dom + hi
        uniq, counts = np.unique(keys, return_counts=True)
        pairs = np.stack([uniq // n_dom, uniq % n_dom], axis=1)
    else:
        pairs = np.zeros((0, 2), dtype=np.int64)
        counts = np.zeros(0, dtype=np.int64)

    odd = False
    if not lattice.bipartite:
        odd = _has_odd_cycle(n, se)
    return DomainDecomposition(
        lattice=lattice,
        config=config,
        site_domain=site_domain,
        root=root,
        label=config[root],
        size=size,
        internal_edges=internal,
        pairs=pairs,
        multiplicity=counts,
        odd_cycle=odd,
    )


def _has_odd_cycle(n: int, bonds: np.ndarray) -> bool:
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in bonds:
        adj[u].append(v)
        adj[v].append(u)
    colour = [-1] * n
    for s in range(n):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in adj[u]:
                if colour[v] < 0:
                    colour[v] = colour[u] ^ 1
                    queue.append(v)
                elif colour[v] == colour[u]:
                    return True
    return False


def log2_weight(decomp: DomainDecomposition) -> int | None:
    """Sampling weight exponent ``|V| - |E_pre|``.

    Returns ``None`` for a configuration of zero weight, i.e. one with a domain
    that closes an odd cycle (only possible on an odd periodic chain).
    """
    if decomp.odd_cycle:
        return None
    return int(decomp.n_domains - decomp.n_inter)


@dataclass(eq=False)
class GraphState:
    """Simple graph on domains.  ``edges`` are sorted ``(u, v)`` pairs with ``u < v``."""

    n_vertices: int
    edges: np.ndarray
    size: np.ndarray
    label: np.ndarray
    decomp: DomainDecomposition | None = field(default=None, repr=False)
    alive: np.ndarray | None = field(default=None, repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def alive_mask(self) -> np.ndarray:
        """Vertices not removed by dilution (all of them unless ``alive`` is set)."""
        if self.alive is None:
            return np.ones(self.n_vertices, dtype=bool)
        return self.alive

    @cached_property
    def adjacency(self) -> csr_matrix:
        n = self.n_vertices
        e = self.edges
        data = np.ones(2 * len(e), dtype=np.int8)
        rows = np.concatenate([e[:, 0], e[:, 1]])
        cols = np.concatenate([e[:, 1], e[:, 0]])
        return coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    def neighbors(self, v: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[v] : a.indptr[v + 1]]

    def adjacency_sets(self) -> dict[int, set[int]]:
        adj: dict[int, set[int]] = {v: set() for v in range(self.n_vertices)}
        for u, v in self.edges:
            adj[int(u)].add(int(v))
            adj[int(v)].add(int(u))
        return adj

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_vertices)

    @cached_property
    def representatives(self) -> np.ndarray:
        """Per-domain representative site minimising the largest lattice distance to the members."""
        if self.decomp is None:
            raise ValueError("graph has no underlying decomposition")
        return _representatives(self.decomp)

    @cached_property
    def rep_coords(self) -> np.ndarray:
        return self.decomp.lattice.coords[self.representatives]

    def subgraph_mask(self, keep: np.ndarray) -> "GraphState":
        """Keep vertices with ``keep[v]`` true; vertex ids are preserved."""
        e = self.edges
        ok = keep[e[:, 0]] & keep[e[:, 1]] if len(e) else np.zeros(0, dtype=bool)
        alive = self.alive_mask & keep
        return GraphState(self.n_vertices, e[ok], self.size, self.label, self.decomp, alive)


def build_graph(decomp: DomainDecomposition) -> GraphState:
    """Keep the domain pairs joined by an odd number of bonds."""
    odd = decomp.multiplicity % 2 == 1
    return GraphState(
        n_vertices=decomp.n_domains,
        edges=decomp.pairs[odd].astype(np.int64),
        size=decomp.size,
        label=decomp.label,
        decomp=decomp,
    )


def _representatives(decomp: DomainDecomposition) -> np.ndarray:
    lat = decomp.lattice
    nbr = lat.neighbors
    reps = decomp.root.copy()
    for d in np.flatnonzero(decomp.size > 2):
        members = decomp.members(d)
        target = set(members.tolist())
        best, best_ecc = None, None
        for v in members:
            ecc = _eccentricity(nbr, int(v), target, limit=best_ecc)
            if ecc is not None and (best_ecc is None or ecc < best_ecc):
                best, best_ecc = int(v), ecc
        reps[d] = best
    return reps


def _eccentricity(nbr: np.ndarray, source: int, target: set[int], limit: int | None):
    """Largest lattice distance from ``source`` to ``target``; None once it reaches ``limit``."""
    remaining = len(target) - 1
    if remaining == 0:
        return 0
    seen = {source}
    frontier = [source]
    depth = 0
    while frontier:
        depth += 1
        if limit is not None and depth >= limit:
            return None
        nxt = []
        for u in frontier:
            for w in nbr[u]:
                w = int(w)
                if w < 0 or w in seen:
                    continue
                seen.add(w)
                nxt.append(w)
                if w in target:
                    remaining -= 1
                    if remaining == 0:
                        return depth
        frontier = nxt
    raise ValueError("domain members are not connected in the lattice")


def write_graph(graph: GraphState, path: str | Path, lattice: Lattice | None = None) -> None:
    """Edge list with header, a blank line, then an ``id size row col`` table."""
    lattice = lattice or (graph.decomp.lattice if graph.decomp is not None else None)
    kind = lattice.kind if lattice else "graph"
    L = lattice.L if lattice else 0
    boundary = lattice.boundary if lattice else "none"
    lines = [f"# {kind} {L} {boundary} {graph.n_vertices} {graph.n_edges}"]
    lines += [f"{u} {v}" for u, v in graph.edges]
    lines.append("")
    lines.append("# id size row col")
    coords = graph.rep_coords if graph.decomp is not None else np.zeros((graph.n_vertices, 2), int)
    for v in range(graph.n_vertices):
        lines.append(f"{v} {graph.size[v]} {coords[v, 0]} {coords[v, 1]}")
    Path(path).write_text("\n".join(lines) + "\n")
