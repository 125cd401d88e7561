"""Sparse Pauli strings and GF(2) linear algebra."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# (a, b) -> (phase, c) with sigma_a sigma_b = phase * sigma_c
_MUL = {
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "X"): (-1j, "Z"),
    ("Y", "Z"): (1j, "X"), ("Z", "Y"): (-1j, "X"),
    ("Z", "X"): (1j, "Y"), ("X", "Z"): (-1j, "Y"),
}
LETTER = "XYZ"


@dataclass
class Pauli:
    """``phase * prod_q sigma_{ops[q]}`` on a register of qubits."""

    ops: dict[int, str] = field(default_factory=dict)
    phase: complex = 1

    @classmethod
    def single(cls, q: int, letter: str, phase: complex = 1) -> "Pauli":
        return cls({q: letter}, phase)

    def __mul__(self, other: "Pauli") -> "Pauli":
        ops = dict(self.ops)
        phase = self.phase * other.phase
        for q, b in other.ops.items():
            a = ops.pop(q, "I")
            if a == "I":
                ops[q] = b
                continue
            ph, c = _MUL[(a, b)]
            phase *= ph
            if c != "I":
                ops[q] = c
        return Pauli(ops, phase)

    def scaled(self, s: complex) -> "Pauli":
        return Pauli(dict(self.ops), self.phase * s)

    def symplectic(self, n: int) -> np.ndarray:
        v = np.zeros(2 * n, dtype=np.uint8)
        for q, a in self.ops.items():
            if a in "XY":
                v[q] = 1
            if a in "YZ":
                v[n + q] = 1
        return v

    def commutes(self, other: "Pauli") -> bool:
        anti = sum(1 for q, a in self.ops.items() if q in other.ops and other.ops[q] != a)
        return anti % 2 == 0

    def label(self, n: int) -> str:
        return "".join(self.ops.get(q, "I") for q in range(n))


def gf2_row_reduce(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form over GF(2) and the pivot columns."""
    m = np.array(mat, dtype=np.uint8) % 2
    pivots = []
    row = 0
    for col in range(m.shape[1]):
        if row >= m.shape[0]:
            break
        hits = np.flatnonzero(m[row:, col])
        if not hits.size:
            continue
        p = row + hits[0]
        if p != row:
            m[[row, p]] = m[[p, row]]
        others = np.flatnonzero(m[:, col])
        others = others[others != row]
        m[others] ^= m[row]
        pivots.append(col)
        row += 1
    return m, pivots


def gf2_rank(mat: np.ndarray) -> int:
    if np.size(mat) == 0:
        return 0
    return len(gf2_row_reduce(mat)[1])


def gf2_nullspace(mat: np.ndarray) -> np.ndarray:
    """Basis (rows) of ``{x : mat @ x = 0 mod 2}``."""
    mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8))
    ncols = mat.shape[1]
    rref, pivots = gf2_row_reduce(mat)
    free = [c for c in range(ncols) if c not in set(pivots)]
    basis = []
    for f in free:
        x = np.zeros(ncols, dtype=np.uint8)
        x[f] = 1
        for r, p in enumerate(pivots):
            x[p] = rref[r, f]
        basis.append(x)
    return np.array(basis, dtype=np.uint8).reshape(len(basis), ncols)


def gf2_inverse(mat: np.ndarray) -> np.ndarray:
    n = mat.shape[0]
    aug = np.concatenate([np.asarray(mat, dtype=np.uint8) % 2, np.eye(n, dtype=np.uint8)], axis=1)
    rref, pivots = gf2_row_reduce(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular over GF(2)")
    return rref[:, n:]
