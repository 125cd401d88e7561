"""Dense state vectors of small AKLT states and exact POVM outcome statistics.

Every site of coordination ``k`` carries ``k`` virtual qubits (one per bond
slot); open lattices add one qubit per terminator.  Qubits are ordered site by
site (slot order within a site) followed by the terminators, and qubit 0 is
the most significant index of the state vector.

The POVM element for label ``a`` at a site is ``c (|b0><b0| + |b1><b1|)`` with
``b0 = |aa..a>``, ``b1`` the same with every qubit flipped to the opposite
``a`` eigenstate, and ``c = sqrt(2/3)`` (three qubits) or ``sqrt(1/2)`` (two).
After the POVM a state is therefore fixed by ``2 ** N`` amplitudes
``<b_s| Phi>`` (times ``c ** N``) times the terminator amplitudes.  The
oracle works with this *compressed* tensor of shape ``(2,) * (N + T)``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

import numpy as np

from ..domains import format_config, label_domains, log2_weight
from ..lattice import Lattice

MAX_QUBITS = 24
MAX_SITES = 10

# single-qubit eigenvectors: EIG[a][0] is the +1 state, EIG[a][1] the -1 state
_S = 1 / math.sqrt(2)
EIG = {
    0: (np.array([_S, _S], complex), np.array([_S, -_S], complex)),  # X
    1: (np.array([_S, 1j * _S], complex), np.array([_S, -1j * _S], complex)),  # Y
    2: (np.array([1, 0], complex), np.array([0, 1], complex)),  # Z
}
PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class QubitBudgetError(ValueError):
    """The requested instance needs more qubits (or configurations) than the oracle allows."""


def kron_all(mats) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def povm_prefactor(k: int) -> float:
    return math.sqrt(2.0 / 3.0) if k == 3 else math.sqrt(0.5)


def povm_basis(a: int, k: int) -> np.ndarray:
    """Rows ``b0, b1`` (as vectors on ``k`` qubits) spanning the range of label ``a``."""
    plus, minus = EIG[a]
    b0 = plus
    b1 = minus
    for _ in range(k - 1):
        b0 = np.kron(b0, plus)
        b1 = np.kron(b1, minus)
    return np.stack([b0, b1])


def povm_operator(a: int, k: int, scale: float = 1.0) -> np.ndarray:
    b = povm_basis(a, k)
    return scale * povm_prefactor(k) * (np.outer(b[0], b[0].conj()) + np.outer(b[1], b[1].conj()))


def symmetric_projector(k: int) -> np.ndarray:
    """Projector onto the permutation-symmetric subspace of ``k`` qubits."""
    dim = 2**k
    P = np.zeros((dim, dim))
    for perm in itertools.permutations(range(k)):
        for idx in range(dim):
            bits = [(idx >> (k - 1 - j)) & 1 for j in range(k)]
            out = 0
            for j in range(k):
                out = (out << 1) | bits[perm[j]]
            P[out, idx] += 1
    return P / math.factorial(k)


def verify_povm_completeness(spin: float, scale: dict[int, float] | None = None, tol: float = 1e-12) -> bool:
    """Does ``sum_a F_a^dagger F_a`` equal the symmetric projector (spin 1 or 3/2)?

    ``scale`` multiplies individual elements (e.g. ``{2: 2.0}`` doubles F_z) for
    negative controls.
    """
    if spin == 1:
        k = 2
    elif spin == 1.5:
        k = 3
    else:
        raise ValueError("spin must be 1 or 3/2")
    scale = scale or {}
    total = sum(
        povm_operator(a, k, scale.get(a, 1.0)).conj().T @ povm_operator(a, k, scale.get(a, 1.0))
        for a in range(3)
    )
    return bool(np.max(np.abs(total - symmetric_projector(k))) <= tol)


@dataclass(frozen=True)
class QubitLayout:
    """Assignment of virtual qubits to (site, slot) pairs, bonds and terminators."""

    site_qubits: tuple[tuple[int, ...], ...]
    bond_qubits: tuple[tuple[int, int], ...]
    terminator_qubits: tuple[int, ...]
    terminator_site: tuple[int, ...]
    terminator_partner: tuple[int, ...]

    @property
    def n_site_qubits(self) -> int:
        return sum(len(q) for q in self.site_qubits)

    @property
    def n_qubits(self) -> int:
        return self.n_site_qubits + len(self.terminator_qubits)

    def owner(self) -> list[tuple[str, int, int]]:
        """Per qubit: ``("site", site, slot)`` or ``("terminator", site, index)``."""
        out: list[tuple[str, int, int]] = [("", -1, -1)] * self.n_qubits
        for v, qs in enumerate(self.site_qubits):
            for slot, q in enumerate(qs):
                out[q] = ("site", v, slot)
        for t, (q, v) in enumerate(zip(self.terminator_qubits, self.terminator_site)):
            out[q] = ("terminator", v, t)
        return out


def qubit_layout(lattice: Lattice) -> QubitLayout:
    k = lattice.coordination
    n = lattice.n_sites
    site_qubits = tuple(tuple(range(v * k, (v + 1) * k)) for v in range(n))
    used = [0] * n
    bonds = []
    for u, v in lattice.edges:
        bonds.append((site_qubits[u][used[u]], site_qubits[v][used[v]]))
        used[u] += 1
        used[v] += 1
    tq, ts, tp = [], [], []
    q = n * k
    for v in range(n):
        for _ in range(int(lattice.terminators[v])):
            tq.append(q)
            ts.append(v)
            tp.append(site_qubits[v][used[v]])
            used[v] += 1
            q += 1
    if any(u != k for u in used):
        raise ValueError("every virtual qubit must be paired by a bond or a terminator")
    return QubitLayout(site_qubits, tuple(bonds), tuple(tq), tuple(ts), tuple(tp))


@dataclass
class DenseState:
    """Unnormalised AKLT state ``(prod P_S) (prod singlets) |.>`` as a real vector."""

    lattice: Lattice
    layout: QubitLayout
    amplitudes: np.ndarray
    normalized: bool = False

    @property
    def n_qubits(self) -> int:
        return self.layout.n_qubits

    @cached_property
    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


def _singlet_product(n_qubits: int, pairs, flip: set[int] | None = None) -> np.ndarray:
    """Tensor product of singlets ``|01> - |10>`` on the given ordered qubit pairs."""
    singlet = np.array([[0.0, 1.0], [-1.0, 0.0]])
    state = np.ones(())
    axes: list[int] = []
    for idx, (a, b) in enumerate(pairs):
        s = singlet.T if flip and idx in flip else singlet
        state = np.multiply.outer(state, s)
        axes += [a, b]
    perm = np.argsort(axes)
    return np.ascontiguousarray(state.transpose(perm)).reshape(-1)


def build_aklt(lattice: Lattice, flip_bonds: set[int] | None = None) -> DenseState:
    """Dense unnormalised AKLT state; ``flip_bonds`` reverses the singlet orientation of selected bonds."""
    layout = qubit_layout(lattice)
    q = layout.n_qubits
    if q > MAX_QUBITS:
        raise QubitBudgetError(f"{q} virtual qubits exceed the budget of {MAX_QUBITS}")
    pairs = list(layout.bond_qubits) + list(zip(layout.terminator_partner, layout.terminator_qubits))
    psi = _singlet_product(q, pairs, flip_bonds)
    k = lattice.coordination
    proj = symmetric_projector(k)
    for v, qs in enumerate(layout.site_qubits):
        pre = 2 ** qs[0]
        post = 2 ** (q - qs[-1] - 1)
        psi = np.einsum("ij,ajb->aib", proj, psi.reshape(pre, 2**k, post)).reshape(-1)
    return DenseState(lattice, layout, psi)


def _site_rows(a: int, k: int) -> np.ndarray:
    """``B`` with ``B @ x = (<b0|x>, <b1|x>)``, scaled by the POVM prefactor."""
    return povm_prefactor(k) * povm_basis(a, k).conj()


def iter_compressed(state: DenseState, configs=None) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
    """Yield ``(config, psi_c)`` with ``psi_c`` of shape ``(2,) * (N + T)``.

    Configurations are visited depth-first in lexicographic order (site 0
    slowest), sharing partial contractions.  ``configs`` restricts the walk to
    a set of configurations.
    """
    lat = state.lattice
    n = lat.n_sites
    k = lat.coordination
    T = len(state.layout.terminator_qubits)
    wanted = None if configs is None else {tuple(int(x) for x in c) for c in configs}
    prefixes = None
    if wanted is not None:
        prefixes = {c[:d] for c in wanted for d in range(n + 1)}
    rows = {a: _site_rows(a, k) for a in range(3)}

    def walk(tensor: np.ndarray, depth: int, prefix: tuple[int, ...]):
        if depth == n:
            psi = tensor.reshape((2,) * T + (2,) * n)
            psi = np.moveaxis(psi, list(range(T)), list(range(n, n + T)))
            yield prefix, np.ascontiguousarray(psi)
            return
        mat = tensor.reshape(2**k, -1)
        for a in range(3):
            nxt = prefix + (a,)
            if prefixes is not None and nxt not in prefixes:
                continue
            out = rows[a] @ mat
            out = np.ascontiguousarray(np.moveaxis(out.reshape(2, -1), 0, -1))
            yield from walk(out, depth + 1, nxt)

    yield from walk(state.amplitudes, 0, ())


@dataclass
class ExactDistribution:
    lattice: Lattice
    configs: np.ndarray
    probs: np.ndarray
    norm2: float

    def as_dict(self) -> dict[str, float]:
        return {format_config(c, digits=False): float(p) for c, p in zip(self.configs, self.probs)}

    def prob(self, config) -> float:
        idx = int(np.dot(np.asarray(config, dtype=np.int64), 3 ** np.arange(len(config))[::-1]))
        return float(self.probs[idx])


def _check_budget(lattice: Lattice) -> None:
    if lattice.n_sites > MAX_SITES:
        raise QubitBudgetError(f"{lattice.n_sites} sites give too many configurations to enumerate")


def exact_distribution(lattice: Lattice, state: DenseState | None = None) -> ExactDistribution:
    """Exact outcome probabilities ``||psi(A)||^2 / <Phi|Phi>`` for all ``3**N`` configurations."""
    _check_budget(lattice)
    state = state or build_aklt(lattice)
    configs, probs = [], []
    for cfg, psi in iter_compressed(state):
        configs.append(cfg)
        probs.append(float(np.vdot(psi, psi).real))
    probs = np.array(probs) / state.norm2
    return ExactDistribution(lattice, np.array(configs, dtype=np.int8), probs, state.norm2)


def weight_formula_residual(dist: ExactDistribution) -> float:
    """Max relative deviation between exact probabilities and normalised ``2**(|V|-|E_pre|)``.

    Zero-weight configurations must have exact probability below 1e-14.
    """
    weights = []
    for cfg in dist.configs:
        w = log2_weight(label_domains(dist.lattice, cfg))
        weights.append(0.0 if w is None else math.ldexp(1.0, w))
    weights = np.array(weights)
    predicted = weights / weights.sum()
    worst = 0.0
    for p, q in zip(dist.probs, predicted):
        if q == 0:
            if abs(p) > 1e-14:
                return math.inf
            continue
        worst = max(worst, abs(p - q) / q)
    return worst


def transfer_matrix_norm(n: int) -> float:
    """``<Phi|Phi>`` of the periodic spin-1 chain from its 4x4 transfer matrix.

    Independent of :func:`build_aklt`: the state is written as a matrix
    product with ``A[s]_{l,l'} = sum_r <s|P_S|l r> eps_{r l'}``.
    """
    P = symmetric_projector(2).reshape(4, 2, 2)
    eps = np.array([[0.0, 1.0], [-1.0, 0.0]])
    A = np.einsum("slr,rm->slm", P, eps)
    E = np.einsum("slm,skn->lkmn", A, A).reshape(4, 4)
    return float(np.trace(np.linalg.matrix_power(E, n)))


def periodic_chain_p0(n: int) -> float:
    """Probability of a mixed configuration on the periodic chain of ``n`` sites."""
    return 1.0 / (3**n + 3) if n % 2 == 0 else 1.0 / (3**n - 3)
