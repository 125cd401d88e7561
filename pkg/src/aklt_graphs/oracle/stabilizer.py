"""Stabilizer tableaux, Pauli measurements and local-Clifford equivalence.

The tableau follows the CHP layout: rows ``0 .. n-1`` are destabilisers,
rows ``n .. 2n-1`` stabilisers, each row a Pauli ``(-1)^r prod_j
i^(x_j z_j) X^x_j Z^z_j`` (so ``x = z = 1`` is ``Y``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .pauli import gf2_inverse, gf2_nullspace, gf2_rank, gf2_row_reduce


class DeterministicOutcomeError(ValueError):
    """A post-selected +1 outcome has probability zero (the outcome is fixed to -1)."""


def _g(x1, z1, x2, z2) -> np.ndarray:
    """Exponent of ``i`` picked up when multiplying single-qubit Paulis (vectorised)."""
    x1, z1, x2, z2 = (np.asarray(a, dtype=np.int64) for a in (x1, z1, x2, z2))
    out = np.zeros_like(x1)
    y = (x1 == 1) & (z1 == 1)
    xo = (x1 == 1) & (z1 == 0)
    zo = (x1 == 0) & (z1 == 1)
    out[y] = (z2 - x2)[y]
    out[xo] = (z2 * (2 * x2 - 1))[xo]
    out[zo] = (x2 * (1 - 2 * z2))[zo]
    return out


@dataclass
class Tableau:
    x: np.ndarray
    z: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[1]

    def copy(self) -> "Tableau":
        return Tableau(self.x.copy(), self.z.copy(), self.r.copy())

    @classmethod
    def from_graph(cls, adjacency) -> "Tableau":
        """Graph state: stabilisers ``X_v Z_N(v)``, destabilisers ``Z_v``."""
        A = np.asarray(adjacency, dtype=np.uint8) % 2
        n = A.shape[0]
        x = np.zeros((2 * n, n), dtype=np.uint8)
        z = np.zeros((2 * n, n), dtype=np.uint8)
        z[:n] = np.eye(n, dtype=np.uint8)
        x[n:] = np.eye(n, dtype=np.uint8)
        z[n:] = A
        return cls(x, z, np.zeros(2 * n, dtype=np.uint8))

    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        x = np.zeros((2 * n, n), dtype=np.uint8)
        z = np.zeros((2 * n, n), dtype=np.uint8)
        x[:n] = np.eye(n, dtype=np.uint8)
        z[n:] = np.eye(n, dtype=np.uint8)
        return cls(x, z, np.zeros(2 * n, dtype=np.uint8))

    # gates -----------------------------------------------------------------
    def h(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int) -> None:
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def cz(self, a: int, b: int) -> None:
        self.h(b)
        self.cnot(a, b)
        self.h(b)

    def cnot(self, a: int, b: int) -> None:
        self.r ^= self.x[:, a] & self.z[:, b] & (self.x[:, b] ^ self.z[:, a] ^ 1)
        self.x[:, b] ^= self.x[:, a]
        self.z[:, a] ^= self.z[:, b]

    # row algebra -----------------------------------------------------------
    def _rowmul(self, h: int, i: int) -> None:
        """Row ``h`` <- row ``i`` * row ``h``."""
        phase = 2 * int(self.r[h]) + 2 * int(self.r[i])
        phase += int(_g(self.x[i], self.z[i], self.x[h], self.z[h]).sum())
        self.r[h] = (phase % 4) // 2
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure(self, px: np.ndarray, pz: np.ndarray, sign: int = 0) -> str:
        """Measure ``(-1)^sign P`` and keep the +1 outcome.

        Returns ``"random"`` or ``"deterministic"``; raises
        :class:`DeterministicOutcomeError` when the state is a -1 eigenstate.
        """
        n = self.n
        px = np.asarray(px, dtype=np.uint8)
        pz = np.asarray(pz, dtype=np.uint8)
        anti = ((self.x @ pz) + (self.z @ px)) % 2
        stab = np.flatnonzero(anti[n:])
        if stab.size:
            p = n + int(stab[0])
            for i in np.flatnonzero(anti):
                if i != p:
                    self._rowmul(int(i), p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p], self.z[p], self.r[p]
            self.x[p], self.z[p], self.r[p] = px, pz, sign
            return "random"
        # deterministic: P is (+-) a product of stabilisers
        scratch = Tableau(
            np.vstack([self.x, np.zeros((1, n), np.uint8)]),
            np.vstack([self.z, np.zeros((1, n), np.uint8)]),
            np.append(self.r, 0).astype(np.uint8),
        )
        for i in np.flatnonzero(anti[:n]):
            scratch._rowmul(2 * n, int(i) + n)
        if not (np.array_equal(scratch.x[2 * n], px) and np.array_equal(scratch.z[2 * n], pz)):
            raise AssertionError("measured Pauli not in the stabiliser group")
        if int(scratch.r[2 * n]) != sign:
            raise DeterministicOutcomeError("post-selected outcome has probability zero")
        return "deterministic"

    def stabilizers(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.n
        return self.x[n:].copy(), self.z[n:].copy(), self.r[n:].copy()

    def check(self) -> bool:
        """Stabilisers commute pairwise and are independent."""
        x, z, _ = self.stabilizers()
        comm = (x @ z.T + z @ x.T) % 2
        return not comm.any() and gf2_rank(np.hstack([x, z])) == self.n


def pauli_vectors(n: int, q: int, basis: str) -> tuple[np.ndarray, np.ndarray]:
    px = np.zeros(n, dtype=np.uint8)
    pz = np.zeros(n, dtype=np.uint8)
    if basis in "XY":
        px[q] = 1
    if basis in "YZ":
        pz[q] = 1
    if basis not in ("X", "Y", "Z"):
        raise ValueError(f"basis must be X, Y or Z, got {basis!r}")
    return px, pz


def stabilizer_measure(tab: Tableau, vertex: int, basis: str) -> Tableau:
    """Single-qubit Pauli measurement, post-selected on +1; returns a new tableau."""
    out = tab.copy()
    out.measure(*pauli_vectors(tab.n, vertex, basis))
    return out


@dataclass
class GraphForm:
    adjacency: np.ndarray
    hadamards: list[int]
    phases: list[int]


def to_graph_form(tab: Tableau) -> GraphForm:
    """Local-Clifford-equivalent graph state of a stabiliser state (signs ignored).

    Hadamards on a set ``J`` of qubits make the X block invertible, then the
    generators are recombined into ``[I | Gamma]`` and the diagonal of
    ``Gamma`` is cleared with phase gates.
    """
    x, z, _ = tab.stabilizers()
    n = tab.n
    rx, pivots = gf2_row_reduce(np.hstack([x, z]))
    # rows after reduction over the full [X|Z] matrix: X-pivot rows first
    k = sum(1 for p in pivots if p < n)
    zrows = rx[k:, n:]
    nonp = [c for c in range(n) if c not in set(pivots[:k])]
    _, zp = gf2_row_reduce(zrows[:, nonp])
    J = [nonp[c] for c in zp]
    x, z = x.copy(), z.copy()
    for q in J:
        x[:, q], z[:, q] = z[:, q].copy(), x[:, q].copy()
    inv = gf2_inverse(x)
    gamma = (inv.astype(np.int64) @ z) % 2
    diag = [int(i) for i in np.flatnonzero(np.diag(gamma))]
    gamma[diag, diag] = 0
    if not np.array_equal(gamma, gamma.T):
        raise AssertionError("graph form is not symmetric")
    return GraphForm(gamma.astype(np.uint8), J, diag)


# single-qubit Cliffords modulo Paulis, as 2x2 maps on (x, z)
LOCAL_CLIFFORDS = [
    (a, b, c, d)
    for a, b, c, d in itertools.product((0, 1), repeat=4)
    if (a * d + b * c) % 2 == 1
]


def _same_group(x1, z1, x2, z2) -> bool:
    n = x1.shape[1]
    return gf2_rank(np.vstack([np.hstack([x1, z1]), np.hstack([x2, z2])])) == n


def lc_equivalent_bruteforce(t1: Tableau, t2: Tableau) -> bool:
    """Search all ``6 ** n`` local Cliffords (modulo Paulis) mapping ``t1``'s group onto ``t2``'s."""
    x1, z1, _ = t1.stabilizers()
    x2, z2, _ = t2.stabilizers()
    n = t1.n
    for choice in itertools.product(LOCAL_CLIFFORDS, repeat=n):
        a, b, c, d = (np.array(v, dtype=np.uint8) for v in zip(*choice))
        nx = (x1 * a + z1 * b) % 2
        nz = (x1 * c + z1 * d) % 2
        if _same_group(nx, nz, x2, z2):
            return True
    return False


def _components(adj: np.ndarray) -> list[list[int]]:
    n = adj.shape[0]
    seen = [False] * n
    comps = []
    for s in range(n):
        if seen[s]:
            continue
        stack, comp = [s], []
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in np.flatnonzero(adj[u]):
                if not seen[w]:
                    seen[w] = True
                    stack.append(int(w))
        comps.append(sorted(comp))
    return comps


MAX_NULLITY = 22


def _lc_graphs_connected(g1: np.ndarray, g2: np.ndarray) -> bool:
    """Local-Clifford equivalence of two graph states on the same vertex set.

    Solves the linear conditions for diagonal ``A, B, C, D`` with
    ``g1 B g2 + g1 A + D g2 + C = 0`` over GF(2), then searches the solution
    space for one with ``a_i d_i + b_i c_i = 1`` at every vertex.
    """
    n = g1.shape[0]
    rows = []
    # unknown order: a (n), b (n), c (n), d (n)
    for r in range(n):
        for s in range(n):
            eq = np.zeros(4 * n, dtype=np.uint8)
            eq[s] ^= g1[r, s]  # (g1 A)_rs = g1_rs a_s
            for i in range(n):
                eq[n + i] ^= g1[r, i] & g2[i, s]  # (g1 B g2)_rs
            eq[3 * n + r] ^= g2[r, s]  # (D g2)_rs = d_r g2_rs
            if r == s:
                eq[2 * n + r] ^= 1
            rows.append(eq)
    basis = gf2_nullspace(np.array(rows))
    dim = basis.shape[0]
    if dim > MAX_NULLITY:
        raise ValueError(f"solution space of dimension {dim} too large to search")
    if dim == 0:
        return False
    coeffs = (np.arange(2**dim)[:, None] >> np.arange(dim)) & 1
    sols = (coeffs.astype(np.int64) @ basis) % 2
    a, b, c, d = sols[:, :n], sols[:, n : 2 * n], sols[:, 2 * n : 3 * n], sols[:, 3 * n :]
    ok = ((a * d + b * c) % 2 == 1).all(axis=1)
    return bool(ok.any())


def lc_equivalent_graphs(g1, g2) -> bool:
    """Are the graph states of ``g1`` and ``g2`` (same vertex labels) local-Clifford equivalent?"""
    g1 = np.asarray(g1, dtype=np.uint8)
    g2 = np.asarray(g2, dtype=np.uint8)
    if g1.shape != g2.shape:
        return False
    c1 = _components(g1)
    if c1 != _components(g2):
        return False
    for comp in c1:
        if len(comp) == 1:
            continue
        idx = np.ix_(comp, comp)
        if not _lc_graphs_connected(g1[idx], g2[idx]):
            return False
    return True


def lc_equivalent(t1: Tableau, t2: Tableau) -> bool:
    """Local-Clifford equivalence of two stabiliser states via their graph forms."""
    return lc_equivalent_graphs(to_graph_form(t1).adjacency, to_graph_form(t2).adjacency)


def tableau_state(tab: Tableau) -> np.ndarray:
    """Dense state vector (qubit 0 most significant) stabilised by the tableau, up to phase."""
    n = tab.n
    x, z, r = tab.stabilizers()
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Z = np.array([[1, 0], [0, -1]], dtype=complex)
    psi = np.zeros(2**n, dtype=complex)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    for row in range(n):
        op = np.ones((1, 1), dtype=complex)
        for j in range(n):
            m = np.eye(2, dtype=complex)
            if x[row, j] and z[row, j]:
                m = 1j * X @ Z
            elif x[row, j]:
                m = X
            elif z[row, j]:
                m = Z
            op = np.kron(op, m)
        psi = 0.5 * (psi + (-1) ** int(r[row]) * (op @ psi))
    return psi / np.linalg.norm(psi)


def graph_state_vector(adjacency) -> np.ndarray:
    A = np.asarray(adjacency, dtype=np.int64)
    n = A.shape[0]
    bits = (np.arange(2**n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    parity = np.einsum("ki,ij,kj->k", bits, np.triu(A, 1), bits) % 2
    return (1 - 2 * parity) / np.sqrt(2**n)
