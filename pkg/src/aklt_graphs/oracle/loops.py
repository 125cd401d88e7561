"""Loop sets of domains: even-degree edge subsets and their count.

A connected domain with ``V`` sites and ``E`` internal bonds has a cycle space
of dimension ``E - V + 1``, so it carries ``2 ** (E - V + 1)`` loop sets.  On a
torus the cycle space splits into contractible loops (``F``) and loops that
wind around the lattice (``W`` independent winding classes) with
``F + W = E - V + 1``.
"""

from __future__ import annotations

from collections import Counter, deque

import numpy as np

from ..lattice import Lattice
from .pauli import gf2_rank


class DisconnectedDomainError(ValueError):
    """The edge set does not form a single connected component."""


def _vertex_ids(edges) -> dict[int, int]:
    ids: dict[int, int] = {}
    for u, v in edges:
        for x in (int(u), int(v)):
            ids.setdefault(x, len(ids))
    return ids


def _components(n: int, edges) -> int:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps


def count_loop_sets(edges, vertices=None) -> int:
    """``2 ** (E - V + 1)`` for a connected (multi)graph given as an edge list.

    ``vertices`` lists isolated vertices too (a single-site domain has no
    edges); it defaults to the endpoints of ``edges``.
    """
    edges = [(int(u), int(v)) for u, v in edges]
    ids = _vertex_ids(edges)
    if vertices is not None:
        for x in vertices:
            ids.setdefault(int(x), len(ids))
    n = len(ids)
    if n == 0:
        raise DisconnectedDomainError("empty domain")
    local = [(ids[u], ids[v]) for u, v in edges]
    if _components(n, local) != 1:
        raise DisconnectedDomainError("domain is not connected")
    return 2 ** (len(edges) - n + 1)


def brute_force_loop_sets(edges) -> int:
    """Count edge subsets with every vertex of even degree (meet in the middle).

    Each half of the edge list is enumerated once; subsets from both halves
    combine into an even subgraph iff their vertex-parity masks agree.
    """
    edges = [(int(u), int(v)) for u, v in edges]
    ids = _vertex_ids(edges)
    masks = [(1 << ids[u]) ^ (1 << ids[v]) for u, v in edges]
    half = len(masks) // 2

    def parities(part):
        counts = Counter({0: 1})
        for m in part:
            new = Counter()
            for p, c in counts.items():
                new[p ^ m] += c
            counts += new
        return counts

    left, right = parities(masks[:half]), parities(masks[half:])
    return sum(c * right.get(p, 0) for p, c in left.items())


def domain_edges(lattice: Lattice, sites) -> np.ndarray:
    """Lattice bonds with both ends in ``sites``."""
    inside = np.zeros(lattice.n_sites, dtype=bool)
    inside[np.asarray(list(sites), dtype=np.int64)] = True
    e = lattice.edges
    return e[inside[e[:, 0]] & inside[e[:, 1]]]


def _bond_shift(lattice: Lattice, u: int, v: int, wrap: int) -> tuple[int, int]:
    """Displacement from ``u`` to ``v`` in the unrolled embedding (multiples of the periods dropped)."""
    du = lattice.coords[v] - lattice.coords[u]
    dr, dc = int(du[0]), int(du[1])
    if wrap & 1:
        dc = 1 if dc < 0 else -1
    if wrap & 2:
        dr = 1 if dr < 0 else -1
    return dr, dc


def winding_rank(lattice: Lattice, sites) -> int:
    """Number of independent winding classes among the domain's cycles.

    The domain is unrolled by BFS over a spanning tree; every non-tree bond
    closes a fundamental cycle whose winding (mod 2 in each direction) is the
    mismatch between its unrolled and actual endpoint positions.
    """
    sites = [int(s) for s in sites]
    if lattice.boundary != "periodic":
        return 0
    adj: dict[int, list[tuple[int, int, int]]] = {s: [] for s in sites}
    # bonds of the domain with their wrap flag; repeated pairs stay separate
    mask = np.isin(lattice.edges[:, 0], sites) & np.isin(lattice.edges[:, 1], sites)
    bonds = [(int(u), int(v), int(w)) for (u, v), w in zip(lattice.edges[mask], lattice.wrap[mask])]
    for k, (u, v, w) in enumerate(bonds):
        adj[u].append((v, w, k))
        adj[v].append((u, w, k))
    pos = {sites[0]: (0, 0)}
    tree = set()
    queue = deque([sites[0]])
    while queue:
        u = queue.popleft()
        for v, w, k in adj[u]:
            if v in pos:
                continue
            dr, dc = _bond_shift(lattice, u, v, w)
            pos[v] = (pos[u][0] + dr, pos[u][1] + dc)
            tree.add(k)
            queue.append(v)
    if len(pos) != len(sites):
        raise DisconnectedDomainError("domain is not connected")
    vectors = []
    for k, (u, v, w) in enumerate(bonds):
        if k in tree:
            continue
        dr, dc = _bond_shift(lattice, u, v, w)
        mr = pos[u][0] + dr - pos[v][0]
        mc = pos[u][1] + dc - pos[v][1]
        vectors.append([(mc // lattice.cols) % 2, (mr // lattice.rows) % 2])
    return gf2_rank(np.array(vectors, dtype=np.uint8)) if vectors else 0


def plaquettes_inside(lattice: Lattice, sites) -> int:
    """Hexagonal faces whose six sites all belong to ``sites`` (honeycomb only).

    A face of the brick wall is the 2 x 3 block with top-left corner ``(r, c)``
    and ``r + c`` even.
    """
    inside = {tuple(lattice.coords[int(s)]) for s in sites}
    rows, cols = lattice.rows, lattice.cols
    periodic = lattice.boundary == "periodic"
    faces = set()
    for r, c in inside:
        if (r + c) % 2:
            continue
        block = []
        for dr in (0, 1):
            for dc in (0, 1, 2):
                rr, cc = r + dr, c + dc
                if periodic:
                    rr, cc = rr % rows, cc % cols
                block.append((rr, cc))
        if len(set(block)) == 6 and all(b in inside for b in block):
            faces.add((r, c))
    return len(faces)


def loop_structure(lattice: Lattice, sites) -> tuple[int, int, int]:
    """``(F, W, E - V + 1)`` for a connected domain, with ``F`` the contractible part."""
    sites = [int(s) for s in sites]
    e = domain_edges(lattice, sites)
    count = count_loop_sets(e, vertices=sites)
    dim = count.bit_length() - 1
    w = winding_rank(lattice, sites)
    return dim - w, w, dim
