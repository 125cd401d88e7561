"""Checks that post-POVM states are encoded graph states.

For a configuration ``A`` every domain carries a repetition code on its
virtual qubits (site qubits plus attached terminators).  With ``a`` the domain
label and ``lambda = +-1`` the two-colouring of the domain (terminators take
the sign opposite to their site), the code is stabilised by
``lambda_i lambda_j sigma_a^i sigma_a^j``.  Logical operators are
``Zbar = lambda_i sigma_a^i`` on any code qubit and ``Xbar`` the product of
``sigma_f`` over all code qubits, with ``f = x`` for ``a = z`` and ``f = z``
otherwise.  The encoded state is stabilised (up to sign) by
``Rbar_c prod_{mu ~ c} Zbar_mu`` with ``R`` either ``X`` or ``Y``.

Every check is an eigen-relation: for a Pauli string ``P`` and state ``psi``
``|<psi|P|psi>| = <psi|psi>`` holds iff ``P psi = +-psi``.  Expectations are
taken in the compressed basis of :mod:`.dense`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from ..domains import build_graph, label_domains, log2_weight
from ..lattice import Lattice
from .dense import PAULI, DenseState, build_aklt, iter_compressed, kron_all, povm_basis
from .pauli import LETTER, Pauli, gf2_rank


class ZeroProbabilityError(ValueError):
    """The configuration has zero probability; there is no post-measurement state."""


def flip_label(a: int) -> int:
    return 0 if a == 2 else 2


@dataclass
class EncodingReport:
    config: tuple[int, ...]
    ok: bool
    generator: dict[int, str] = field(default_factory=dict)
    signs: dict[int, int] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    max_deviation: float = 0.0
    rank: int = 0
    n_qubits: int = 0


class EncodedContext:
    """Code data of one configuration, optionally with some sites measured out."""

    def __init__(self, lattice: Lattice, config, layout, measured: frozenset[int] = frozenset()):
        self.lattice = lattice
        self.config = np.asarray(config, dtype=np.int8)
        self.layout = layout
        self.measured = measured
        self.decomp = label_domains(lattice, self.config)
        self.graph = build_graph(self.decomp)
        n = lattice.n_sites
        self.active = [v for v in range(n) if v not in measured]
        self.site_axis = {v: i for i, v in enumerate(self.active)}
        self.n_terms = len(layout.terminator_qubits)
        self.term_axis = {q: len(self.active) + t for t, q in enumerate(layout.terminator_qubits)}
        self.lam = self._colouring()
        k = lattice.coordination
        self._rows = {a: povm_basis(a, k).conj() for a in range(3)}

    def _colouring(self) -> dict[int, int]:
        """``lambda`` for every qubit, from a BFS two-colouring of each domain."""
        lat, dec = self.lattice, self.decomp
        colour = np.zeros(lat.n_sites, dtype=np.int64)
        seen = np.zeros(lat.n_sites, dtype=bool)
        adj: dict[int, list[int]] = {v: [] for v in range(lat.n_sites)}
        for u, v in lat.edges:
            if dec.site_domain[u] == dec.site_domain[v] and u != v:
                adj[int(u)].append(int(v))
                adj[int(v)].append(int(u))
        for r in dec.root:
            r = int(r)
            seen[r] = True
            queue = deque([r])
            while queue:
                u = queue.popleft()
                for w in adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        colour[w] = colour[u] ^ 1
                        queue.append(w)
        lam = {}
        for v, qs in enumerate(self.layout.site_qubits):
            for q in qs:
                lam[q] = 1 - 2 * int(colour[v])
        for q, v in zip(self.layout.terminator_qubits, self.layout.terminator_site):
            lam[q] = -(1 - 2 * int(colour[v]))
        return lam

    @property
    def n_qubits(self) -> int:
        k = self.lattice.coordination
        return len(self.active) * k + self.n_terms

    def code_qubits(self, d: int) -> list[int]:
        lay = self.layout
        members = sorted(int(v) for v in self.decomp.members(d))
        qs = [q for v in members if v not in self.measured for q in lay.site_qubits[v]]
        qs += [q for q, v in zip(lay.terminator_qubits, lay.terminator_site) if self.decomp.site_domain[v] == d]
        return qs

    def code_stabilizers(self, d: int) -> list[Pauli]:
        a = LETTER[int(self.decomp.label[d])]
        qs = self.code_qubits(d)
        return [
            Pauli({i: a, j: a}, self.lam[i] * self.lam[j]) for i, j in zip(qs[:-1], qs[1:])
        ]

    def zbar(self, d: int) -> Pauli:
        a = LETTER[int(self.decomp.label[d])]
        q = self.code_qubits(d)[0]
        return Pauli.single(q, a, self.lam[q])

    def xbar(self, d: int) -> Pauli:
        f = LETTER[flip_label(int(self.decomp.label[d]))]
        return Pauli({q: f for q in self.code_qubits(d)})

    def ybar(self, d: int) -> Pauli:
        return (self.xbar(d) * self.zbar(d)).scaled(1j)

    def graph_generator(self, d: int, kind: str) -> Pauli:
        op = self.xbar(d) if kind == "X" else self.ybar(d)
        for mu in self.graph.neighbors(d):
            op = op * self.zbar(int(mu))
        return op

    def bond_operator(self, d: int) -> Pauli:
        """Product of singlet stabilisers around domain ``d`` (sign included)."""
        lay, dec = self.layout, self.decomp
        f = LETTER[flip_label(int(dec.label[d]))]
        op = Pauli()
        for (u, v), (qu, qv) in zip(self.lattice.edges, lay.bond_qubits):
            du, dv = dec.site_domain[u], dec.site_domain[v]
            if du == d and dv == d:
                op = op * Pauli({qu: f, qv: f}, -1)
            elif du == d or dv == d:
                other = dv if du == d else du
                b = LETTER[int(dec.label[other])]
                op = op * Pauli({qu: b, qv: b}, -1)
        for qt, v, qp in zip(lay.terminator_qubits, lay.terminator_site, lay.terminator_partner):
            if dec.site_domain[v] == d:
                op = op * Pauli({qp: f, qt: f}, -1)
        return op

    def apply(self, op: Pauli, psi: np.ndarray) -> np.ndarray:
        per_site: dict[int, dict[int, str]] = {}
        out = psi
        for q, a in op.ops.items():
            kind, v, slot = self._owner[q]
            if kind == "terminator":
                out = _apply_axis(out, PAULI[a], self.term_axis[q])
            else:
                if v in self.measured:
                    raise ValueError(f"operator acts on measured site {v}")
                per_site.setdefault(v, {})[slot] = a
        k = self.lattice.coordination
        for v, slots in per_site.items():
            P = kron_all(PAULI[slots.get(s, "I")] for s in range(k))
            B = self._rows[int(self.config[v])]
            out = _apply_axis(out, B @ P @ B.conj().T, self.site_axis[v])
        return op.phase * out

    @property
    def _owner(self):
        if not hasattr(self, "_owner_cache"):
            self._owner_cache = self.layout.owner()
        return self._owner_cache

    def expectation(self, op: Pauli, psi: np.ndarray) -> complex:
        return complex(np.vdot(psi, self.apply(op, psi)))


def _apply_axis(psi: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, psi, axes=([1], [axis])), 0, axis)


def _eigen(ctx: EncodedContext, op: Pauli, psi: np.ndarray, norm2: float) -> complex:
    return ctx.expectation(op, psi) / norm2


def _check_all(ctx: EncodedContext, psi: np.ndarray, report: EncodingReport, with_bond_ops: bool, tol: float):
    norm2 = float(np.vdot(psi, psi).real)
    generators: list[Pauli] = []

    def expect(op, target, what):
        val = _eigen(ctx, op, psi, norm2)
        dev = abs(val - target)
        report.max_deviation = max(report.max_deviation, dev)
        if dev > tol:
            report.failures.append(f"{what}: <P> = {val:.6g}, expected {target}")
        return val

    for d in range(ctx.decomp.n_domains):
        for i, s in enumerate(ctx.code_stabilizers(d)):
            expect(s, 1, f"code stabiliser {i} of domain {d}")
            generators.append(s)
        if with_bond_ops:
            expect(ctx.bond_operator(d), 1, f"bond operator of domain {d}")
        for kind in ("X", "Y"):
            op = ctx.graph_generator(d, kind)
            val = _eigen(ctx, op, psi, norm2)
            if abs(abs(val) - 1) <= tol and abs(val.imag) <= tol:
                sign = 1 if val.real > 0 else -1
                report.generator[d] = kind
                report.signs[d] = sign
                generators.append(op)
                break
        else:
            report.failures.append(f"domain {d}: neither X nor Y generator stabilises the state")
    n = ctx.n_qubits
    index = {q: i for i, q in enumerate(_active_qubits(ctx))}
    rows = []
    for g in generators:
        v = np.zeros(2 * n, dtype=np.uint8)
        for q, a in g.ops.items():
            i = index[q]
            v[i] = a in "XY"
            v[n + i] = a in "YZ"
        rows.append(v)
    report.rank = gf2_rank(np.array(rows)) if rows else 0
    report.n_qubits = n
    if report.rank != n:
        report.failures.append(f"generators have rank {report.rank}, need {n}")
    report.ok = not report.failures


def _active_qubits(ctx: EncodedContext) -> list[int]:
    qs = [q for v in ctx.active for q in ctx.layout.site_qubits[v]]
    return qs + list(ctx.layout.terminator_qubits)


def verify_encoded_cluster(
    lattice: Lattice,
    config,
    psi: np.ndarray | None = None,
    state: DenseState | None = None,
    tol: float = 1e-9,
    graph=None,
) -> EncodingReport:
    """Check the code, bond-operator and graph-stabiliser relations for one configuration.

    ``graph`` replaces the graph built from the configuration (used for
    negative controls).  Raises :class:`ZeroProbabilityError` for a
    configuration of zero probability.
    """
    config = tuple(int(a) for a in config)
    if psi is None:
        state = state or build_aklt(lattice)
        psi = next(iter_compressed(state, [config]))[1]
        layout = state.layout
    else:
        from .dense import qubit_layout

        layout = state.layout if state is not None else qubit_layout(lattice)
    norm2 = float(np.vdot(psi, psi).real)
    scale = float(np.max(np.abs(psi))) if psi.size else 0.0
    if norm2 == 0 or scale < 1e-12:
        raise ZeroProbabilityError(f"configuration {config} has zero probability")
    ctx = EncodedContext(lattice, config, layout)
    if graph is not None:
        ctx.graph = graph
    report = EncodingReport(config, False)
    _check_all(ctx, psi, report, graph is None, tol)
    return report


def verify_all_configs(lattice: Lattice, tol: float = 1e-9) -> list[EncodingReport]:
    """Run :func:`verify_encoded_cluster` on every positive-probability configuration."""
    state = build_aklt(lattice)
    out = []
    for cfg, psi in iter_compressed(state):
        if log2_weight(label_domains(lattice, np.array(cfg, dtype=np.int8))) is None:
            continue
        out.append(verify_encoded_cluster(lattice, cfg, psi=psi, state=state, tol=tol))
    return out


@dataclass
class DecodingReport:
    config: tuple[int, ...]
    domain: int
    kept: int
    branches: int
    ok: bool
    failures: list[str] = field(default_factory=list)


def measure_sites(psi: np.ndarray, axes: list[int], outcomes: list[int]) -> np.ndarray:
    """Project compressed axes onto ``(|b0> + (-1)^o |b1>)/sqrt(2)`` and drop them (highest axis first)."""
    for axis, o in sorted(zip(axes, outcomes), reverse=True):
        bra = np.array([1.0, -1.0 if o else 1.0]) / np.sqrt(2)
        psi = np.tensordot(bra, psi, axes=([0], [axis]))
    return psi


def verify_domain_decoding(
    lattice: Lattice,
    config,
    domain: int,
    kept: int | None = None,
    state: DenseState | None = None,
    tol: float = 1e-9,
) -> DecodingReport:
    """Measure every site of ``domain`` except ``kept`` in the ``Xbar``-type basis and re-check the code.

    For every outcome branch of non-zero probability the domain must remain an
    encoded qubit, now carried by the kept site and the domain's terminators,
    and the graph relations must still hold for the same graph.
    """
    config = tuple(int(a) for a in config)
    state = state or build_aklt(lattice)
    psi = next(iter_compressed(state, [config]))[1]
    decomp = label_domains(lattice, np.array(config, dtype=np.int8))
    members = sorted(int(v) for v in decomp.members(domain))
    kept = members[0] if kept is None else kept
    if kept not in members:
        raise ValueError(f"site {kept} is not in domain {domain}")
    drop = [v for v in members if v != kept]
    report = DecodingReport(config, domain, kept, 0, False)
    ctx = EncodedContext(lattice, config, state.layout, frozenset(drop))
    norm_before = float(np.vdot(psi, psi).real)
    for bits in range(2 ** len(drop)):
        outcomes = [(bits >> i) & 1 for i in range(len(drop))]
        post = measure_sites(psi, drop, outcomes)
        if float(np.vdot(post, post).real) <= 1e-24 * norm_before:
            continue
        report.branches += 1
        sub = EncodingReport(config, False)
        _check_all(ctx, post, sub, False, tol)
        report.failures += [f"outcomes {outcomes}: {f}" for f in sub.failures]
    report.ok = report.branches > 0 and not report.failures
    return report
