"""Honeycomb and chain lattices in brick-wall coordinates.

The honeycomb is drawn as a brick wall: site ``(r, c)`` is bonded to its
horizontal neighbours ``(r, c +- 1)`` and, when ``r + c`` is even, to the site
directly below it, ``(r + 1, c)``.  Every site therefore has two horizontal
bonds and one vertical bond (up or down), and sublattice A is the set of sites
with ``r + c`` even.

Open lattices attach spin-1/2 terminators to each site whose coordination is
below the bulk value, so that degree plus terminators is always 3 (or 2 on a
chain).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

KINDS = ("honeycomb", "chain1d")
BOUNDARIES = ("periodic", "open", "cut")

#: bulk coordination, i.e. the number of virtual qubits per site
COORDINATION = {"honeycomb": 3, "chain1d": 2}


@dataclass(frozen=True, eq=False)
class Lattice:
    """Immutable lattice description.

    ``edges`` holds canonical ``(min, max)`` pairs and may contain repeated
    pairs (the ``L = 2`` periodic honeycomb and the two-site ring are
    multigraphs).  ``wrap`` marks, per edge, whether it closes a periodic
    direction: bit 1 for the horizontal (column) wrap, bit 2 for the vertical
    (row) wrap.

    ``boundary == "cut"`` is a periodic lattice with its wrap bonds removed.
    It is used for crossing tests only and carries no terminators.
    """

    kind: str
    rows: int
    cols: int
    boundary: str
    coords: np.ndarray
    edges: np.ndarray
    wrap: np.ndarray
    sublattice: np.ndarray
    terminators: np.ndarray
    name: str = field(default="")

    @property
    def n_sites(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def L(self) -> int:
        return self.cols if self.kind == "chain1d" else self.rows

    @property
    def coordination(self) -> int:
        return COORDINATION[self.kind]

    @property
    def n_terminators(self) -> int:
        return int(self.terminators.sum())

    @cached_property
    def degree(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n_sites).astype(np.int32)

    @cached_property
    def neighbors(self) -> np.ndarray:
        """``(N, coordination)`` neighbour table padded with -1.

        A neighbour appears once per bond, so multigraph bonds repeat.
        """
        table = np.full((self.n_sites, self.coordination), -1, dtype=np.int32)
        fill = np.zeros(self.n_sites, dtype=np.int64)
        for u, v in self.edges:
            table[u, fill[u]] = v
            fill[u] += 1
            table[v, fill[v]] = u
            fill[v] += 1
        return table

    @cached_property
    def bipartite(self) -> bool:
        """True when the sublattice labels form a proper two-colouring."""
        s = self.sublattice
        return bool(np.all(s[self.edges[:, 0]] != s[self.edges[:, 1]]))

    @cached_property
    def site_index(self) -> dict[tuple[int, int], int]:
        return {(int(r), int(c)): i for i, (r, c) in enumerate(self.coords)}

    def site_at(self, row: int, col: int) -> int:
        return self.site_index[(row, col)]

    def __repr__(self) -> str:
        label = self.name or f"{self.rows}x{self.cols}"
        return f"Lattice({self.kind}, {label}, {self.boundary}, N={self.n_sites}, E={self.n_edges})"


def _brick_wall_bonds(coords: Iterable[tuple[int, int]], rows: int, cols: int, periodic: bool):
    present = set(coords)
    bonds = []
    for r, c in sorted(present):
        right = (r, c + 1)
        wrap = 0
        if periodic and c + 1 == cols:
            right, wrap = (r, 0), 1
        if right in present:
            bonds.append(((r, c), right, wrap))
        if (r + c) % 2 == 0:
            down = (r + 1, c)
            wrap = 0
            if periodic and r + 1 == rows:
                down, wrap = (0, c), 2
            if down in present:
                bonds.append(((r, c), down, wrap))
    return bonds


def _assemble(kind, rows, cols, boundary, coords, bonds, sublattice, name=""):
    index = {rc: i for i, rc in enumerate(coords)}
    edges = np.array(
        [sorted((index[a], index[b])) for a, b, _ in bonds], dtype=np.int64
    ).reshape(-1, 2)
    wrap = np.array([w for _, _, w in bonds], dtype=np.int8)
    order = np.lexsort((edges[:, 1], edges[:, 0])) if len(edges) else np.arange(0)
    edges, wrap = edges[order], wrap[order]
    coords_arr = np.array(coords, dtype=np.int64).reshape(-1, 2)
    degree = np.bincount(edges.ravel(), minlength=len(coords))
    if boundary == "open":
        terminators = COORDINATION[kind] - degree
    else:
        terminators = np.zeros(len(coords), dtype=np.int64)
    lat = Lattice(
        kind=kind,
        rows=rows,
        cols=cols,
        boundary=boundary,
        coords=coords_arr,
        edges=edges,
        wrap=wrap,
        sublattice=np.asarray(sublattice, dtype=np.int8),
        terminators=terminators.astype(np.int64),
        name=name,
    )
    for arr in (lat.coords, lat.edges, lat.wrap, lat.sublattice, lat.terminators):
        arr.setflags(write=False)
    return lat


def build_lattice(kind: str, L: int, boundary: str = "periodic", cols: int | None = None) -> Lattice:
    """Build a honeycomb (``L`` rows by ``cols`` columns, default square) or a chain of ``L`` sites.

    Raises
    ------
    ValueError
        For an unknown kind or boundary, ``L < 2``, or a periodic honeycomb
        with an odd side.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown lattice kind {kind!r}")
    if boundary not in ("periodic", "open"):
        raise ValueError(f"unknown boundary {boundary!r}")
    if L < 2:
        raise ValueError(f"lattice size must be at least 2, got {L}")

    if kind == "chain1d":
        n = L
        coords = [(0, i) for i in range(n)]
        bonds = [((0, i), (0, i + 1), 0) for i in range(n - 1)]
        if boundary == "periodic":
            bonds.append(((0, n - 1), (0, 0), 1))
        sub = [i % 2 for i in range(n)]
        return _assemble(kind, 1, n, boundary, coords, bonds, sub)

    rows = L
    cols = L if cols is None else cols
    if cols < 2:
        raise ValueError(f"lattice size must be at least 2, got {cols}")
    if boundary == "periodic" and (rows % 2 or cols % 2):
        raise ValueError("periodic honeycomb needs even side lengths")
    coords = [(r, c) for r in range(rows) for c in range(cols)]
    bonds = _brick_wall_bonds(coords, rows, cols, boundary == "periodic")
    sub = [(r + c) % 2 for r, c in coords]
    return _assemble(kind, rows, cols, boundary, coords, bonds, sub)


def build_patch(coords: Sequence[tuple[int, int]], name: str = "") -> Lattice:
    """Open-terminated honeycomb patch induced on the given brick-wall coordinates."""
    coords = sorted({(int(r), int(c)) for r, c in coords})
    if not coords:
        raise ValueError("empty patch")
    if min(min(rc) for rc in coords) < 0:
        raise ValueError("patch coordinates must be non-negative")
    rows = max(r for r, _ in coords) + 1
    cols = max(c for _, c in coords) + 1
    bonds = _brick_wall_bonds(coords, rows, cols, periodic=False)
    sub = [(r + c) % 2 for r, c in coords]
    return _assemble("honeycomb", rows, cols, "open", coords, bonds, sub, name=name)


PATCHES = {
    "dimer": [(0, 0), (0, 1)],
    "star": [(1, 0), (1, 1), (1, 2), (2, 1)],
    "hexagon": [(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (1, 2)],
}


def named_patch(name: str) -> Lattice:
    """Small open-terminated patches: ``dimer``, ``star`` (one site and its three neighbours), ``hexagon``."""
    try:
        return build_patch(PATCHES[name], name=name)
    except KeyError:
        raise ValueError(f"unknown patch {name!r}; choose from {sorted(PATCHES)}") from None


def cut_open(lattice: Lattice) -> Lattice:
    """Drop every periodic wrap bond; the result keeps site numbering."""
    if lattice.boundary != "periodic":
        return lattice
    keep = lattice.wrap == 0
    lat = Lattice(
        kind=lattice.kind,
        rows=lattice.rows,
        cols=lattice.cols,
        boundary="cut",
        coords=lattice.coords,
        edges=lattice.edges[keep],
        wrap=lattice.wrap[keep],
        sublattice=lattice.sublattice,
        terminators=np.zeros(lattice.n_sites, dtype=np.int64),
        name=lattice.name,
    )
    return lat


@dataclass(frozen=True)
class Region:
    """Sites of an axis-aligned rectangle plus its four boundary lines."""

    sites: np.ndarray
    left: np.ndarray
    right: np.ndarray
    top: np.ndarray
    bottom: np.ndarray
    origin: tuple[int, int]
    width: int
    height: int

    def mask(self, n_sites: int) -> np.ndarray:
        m = np.zeros(n_sites, dtype=bool)
        m[self.sites] = True
        return m


def rectangle_sites(lattice: Lattice, origin: tuple[int, int], width: int, height: int) -> Region:
    """Sites inside the ``width`` x ``height`` rectangle whose top-left corner is ``origin = (row, col)``.

    Periodic lattices wrap the rectangle around; open lattices require it to
    lie inside the embedding.
    """
    if width < 1 or height < 1:
        raise ValueError("empty rectangle")
    r0, c0 = origin
    rows, cols = lattice.rows, lattice.cols
    if lattice.boundary == "periodic":
        if width > cols or height > rows:
            raise ValueError("rectangle larger than the periodic lattice")
        dr = (lattice.coords[:, 0] - r0) % rows
        dc = (lattice.coords[:, 1] - c0) % cols
    else:
        if r0 < 0 or c0 < 0 or r0 + height > rows or c0 + width > cols:
            raise ValueError("rectangle extends outside the lattice")
        dr = lattice.coords[:, 0] - r0
        dc = lattice.coords[:, 1] - c0
    inside = (dr >= 0) & (dr < height) & (dc >= 0) & (dc < width)
    sites = np.flatnonzero(inside)
    if len(sites) == 0:
        raise ValueError("rectangle contains no sites")
    return Region(
        sites=sites,
        left=sites[dc[sites] == 0],
        right=sites[dc[sites] == width - 1],
        top=sites[dr[sites] == 0],
        bottom=sites[dr[sites] == height - 1],
        origin=(r0, c0),
        width=width,
        height=height,
    )


def full_region(lattice: Lattice) -> Region:
    return rectangle_sites(lattice, (0, 0), lattice.cols, lattice.rows)


def write_edge_list(lattice: Lattice, path: str | Path) -> None:
    """Write ``# kind L boundary N E`` followed by one ``u v`` line per bond."""
    lines = [f"# {lattice.kind} {lattice.L} {lattice.boundary} {lattice.n_sites} {lattice.n_edges}"]
    lines += [f"{u} {v}" for u, v in lattice.edges]
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path: str | Path) -> tuple[dict, np.ndarray]:
    header, *rest = Path(path).read_text().splitlines()
    kind, L, boundary, n, e = header.lstrip("# ").split()
    edges = np.array([list(map(int, ln.split())) for ln in rest if ln.strip()], dtype=np.int64)
    meta = {"kind": kind, "L": int(L), "boundary": boundary, "N": int(n), "E": int(e)}
    return meta, edges.reshape(-1, 2)
