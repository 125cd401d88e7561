"""Soundness of graph rewrites against stabilizer-tableau measurements.

A rewrite is sound when the graph state of the rewritten graph (measured
vertices left as isolated qubits) is local-Clifford equivalent to the
tableau obtained by measuring the same Paulis on the original graph state.
Signs are ignored, so the branch with probability zero is never needed: when
the +1 outcome is impossible the -1 branch is used instead.
"""

from __future__ import annotations

import itertools

import networkx as nx
import numpy as np

from ..reduction import RewritableGraph, RewriteError
from .stabilizer import DeterministicOutcomeError, Tableau, lc_equivalent_graphs, pauli_vectors, to_graph_form

RULES = ("Z", "Y", "X")


def measure_any(tab: Tableau, q: int, basis: str) -> Tableau:
    """Measure ``basis`` on ``q``, keeping whichever outcome has non-zero probability (+1 first)."""
    out = tab.copy()
    px, pz = pauli_vectors(tab.n, q, basis)
    try:
        out.measure(px, pz, 0)
    except DeterministicOutcomeError:
        out = tab.copy()
        out.measure(px, pz, 1)
    return out


def check_rewrite(adj: np.ndarray, rule: str, vertices: tuple[int, ...]) -> bool:
    """Compare one rewrite (``Z``/``Y`` at ``(v,)``, ``X`` at ``(left, mid)``) with the tableau."""
    A = np.asarray(adj, dtype=np.uint8)
    n = A.shape[0]
    rg = RewritableGraph.from_edges(range(n), zip(*np.nonzero(np.triu(A))))
    tab = Tableau.from_graph(A)
    if rule == "Z":
        rg.measure_z(vertices[0])
        tab = measure_any(tab, vertices[0], "Z")
    elif rule == "Y":
        rg.measure_y(vertices[0])
        tab = measure_any(tab, vertices[0], "Y")
    elif rule == "X":
        left, mid = vertices
        rg.measure_x_pair(left, mid)
        tab = measure_any(tab, left, "X")
        tab = measure_any(tab, mid, "X")
    else:
        raise ValueError(f"unknown rule {rule!r}")
    target = np.zeros((n, n), dtype=np.uint8)
    for u, v in rg.edges():
        target[u, v] = target[v, u] = 1
    return lc_equivalent_graphs(to_graph_form(tab).adjacency, target)


def rewrite_cases(adj: np.ndarray):
    """Every applicable ``(rule, vertices)`` on a graph: Z and Y at each vertex, X at each valid pair."""
    A = np.asarray(adj)
    n = A.shape[0]
    for v in range(n):
        yield "Z", (v,)
        yield "Y", (v,)
    for mid in range(n):
        nb = np.flatnonzero(A[mid])
        if len(nb) != 2:
            continue
        for left in nb:
            yield "X", (int(left), mid)


def check_graph(adj: np.ndarray) -> list[tuple[str, tuple[int, ...]]]:
    """Failing ``(rule, vertices)`` cases on one graph (empty when all rewrites are sound)."""
    bad = []
    for rule, verts in rewrite_cases(adj):
        try:
            ok = check_rewrite(adj, rule, verts)
        except RewriteError:
            ok = False
        if not ok:
            bad.append((rule, verts))
    return bad


def connected_graphs(max_n: int):
    """All connected graphs with 1..``max_n`` vertices (up to isomorphism, ``max_n`` <= 7)."""
    for g in nx.graph_atlas_g():
        if 0 < g.number_of_nodes() <= max_n and nx.is_connected(g):
            yield nx.to_numpy_array(g, dtype=np.uint8, nodelist=sorted(g.nodes))


def random_connected_graph(n: int, rng: np.random.Generator, p: float | None = None) -> np.ndarray:
    """Connected G(n, p) sample by rejection (``p`` drawn uniformly in [0.25, 0.75] when not given)."""
    while True:
        q = rng.uniform(0.25, 0.75) if p is None else p
        A = np.zeros((n, n), dtype=np.uint8)
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < q:
                A[i, j] = A[j, i] = 1
        if nx.is_connected(nx.from_numpy_array(A)):
            return A
