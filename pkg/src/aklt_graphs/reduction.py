"""Graph-state rewrites under Pauli measurements and grid distillation.

The three rewrite rules act on the interaction graph only:

* ``Z`` at ``a``: delete ``a``.
* ``Y`` at ``a``: complement the subgraph induced on ``N(a)``, then delete ``a``.
* ``X`` at ``left`` and ``mid`` on a line ``left - mid - right`` where ``mid``
  has no other neighbour: ``right`` inherits the neighbours of ``left``, and
  ``left`` and ``mid`` are deleted.  Inheritance toggles: a neighbour that
  ``left`` and ``right`` already share loses its edge to ``right``.

Byproduct local Cliffords are not tracked; the graphs produced are equal to the
true post-measurement graph states up to local Cliffords, which the stabilizer
oracle checks rule by rule.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np


class RewriteError(ValueError):
    """A rewrite was requested on a missing vertex or outside its precondition."""


@dataclass
class RewritableGraph:
    adj: dict[int, set[int]]
    coords: dict[int, tuple[float, float]] = field(default_factory=dict)
    log: list[tuple[int, str]] = field(default_factory=list)

    @classmethod
    def from_edges(cls, vertices: Iterable[int], edges, coords=None) -> "RewritableGraph":
        adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise RewriteError("self-loops are not allowed")
            adj.setdefault(u, set()).add(v)
            adj.setdefault(v, set()).add(u)
        return cls(adj, dict(coords or {}))

    @classmethod
    def from_graph_state(cls, graph) -> "RewritableGraph":
        alive = np.flatnonzero(graph.alive_mask)
        coords = {}
        if graph.decomp is not None:
            rc = graph.rep_coords
            coords = {int(v): (float(rc[v, 0]), float(rc[v, 1])) for v in alive}
        keep = set(alive.tolist())
        edges = [(u, v) for u, v in graph.edges if u in keep and v in keep]
        return cls.from_edges(alive, edges, coords)

    def copy(self) -> "RewritableGraph":
        return RewritableGraph({v: set(n) for v, n in self.adj.items()}, dict(self.coords), list(self.log))

    @property
    def n_vertices(self) -> int:
        return len(self.adj)

    @property
    def n_edges(self) -> int:
        return sum(len(n) for n in self.adj.values()) // 2

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, ns in self.adj.items() for v in ns if u < v)

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def __contains__(self, v) -> bool:
        return v in self.adj

    def _require(self, v: int) -> None:
        if v not in self.adj:
            raise RewriteError(f"vertex {v} is not in the graph")

    def _delete(self, v: int) -> None:
        for w in self.adj.pop(v):
            self.adj[w].discard(v)

    def measure_z(self, v: int) -> None:
        self._require(v)
        self._delete(v)
        self.log.append((v, "Z"))

    def measure_y(self, v: int) -> None:
        self._require(v)
        nb = sorted(self.adj[v])
        for i, a in enumerate(nb):
            for b in nb[i + 1 :]:
                if b in self.adj[a]:
                    self.adj[a].discard(b)
                    self.adj[b].discard(a)
                else:
                    self.adj[a].add(b)
                    self.adj[b].add(a)
        self._delete(v)
        self.log.append((v, "Y"))

    def measure_x_pair(self, left: int, mid: int) -> int:
        """Measure ``left`` and ``mid`` in X; returns ``right``, which inherits ``left``'s neighbours."""
        self._require(left)
        self._require(mid)
        nb = self.adj[mid]
        if left not in nb or len(nb) != 2:
            raise RewriteError(f"vertex {mid} must have exactly two neighbours, one of them {left}")
        (right,) = nb - {left}
        inherit = self.adj[left] - {mid, right}
        self._delete(left)
        self._delete(mid)
        for w in inherit:
            self.adj[right].symmetric_difference_update({w})
            self.adj[w].symmetric_difference_update({right})
        self.log.append((left, "X"))
        self.log.append((mid, "X"))
        return right

    def adjacency_matrix(self, order: list[int]) -> np.ndarray:
        index = {v: i for i, v in enumerate(order)}
        A = np.zeros((len(order), len(order)), dtype=np.uint8)
        for u, v in self.edges():
            if u in index and v in index:
                A[index[u], index[v]] = A[index[v], index[u]] = 1
        return A


# --------------------------------------------------------------------------
# distillation pipeline


@dataclass
class FailureReport:
    stage: str
    reason: str
    where: tuple = ()

    def as_dict(self) -> dict:
        return {"stage": self.stage, "reason": self.reason, "where": list(self.where)}


class PipelineFailure(RuntimeError):
    def __init__(self, report: FailureReport):
        super().__init__(f"{report.stage}: {report.reason} at {report.where}")
        self.report = report


DEFAULT_L_CONST = 1.5
PITCH_FACTOR = 3.0
# extra path vertices on each side of a crossing window for junction search
WINDOW_PAD = 4
# a brick-wall column is 1/sqrt(3) as wide as a row is high
COLUMN_ASPECT = math.sqrt(3.0)


def choose_l(size: int, c: float = DEFAULT_L_CONST) -> int:
    """Band width ``l = ceil(c ln size)`` (at least 1)."""
    if size < 2:
        raise ValueError("lattice size must be at least 2")
    if c <= 0:
        raise ValueError("l constant must be positive")
    return max(1, math.ceil(c * math.log(size)))


def band_layout(size: int, l: int, pitch: int) -> list[tuple[int, int]]:
    """Half-open coordinate ranges of equally spaced bands of width ``l``, centred in ``[0, size)``."""
    if l > size or pitch < l:
        return []
    k = (size - l) // pitch + 1
    start = (size - ((k - 1) * pitch + l)) // 2
    return [(start + i * pitch, start + i * pitch + l) for i in range(k)]


@dataclass
class Extents:
    """Per-vertex position data for band membership and boundary contact.

    ``rep`` is the representative ``(row, col)``; ``box`` holds
    ``(rmin, rmax, cmin, cmax)`` over the vertex's lattice sites.
    """

    rep: dict[int, tuple[float, float]]
    box: dict[int, tuple[int, int, int, int]]
    rows: int
    cols: int

    @classmethod
    def from_graph_state(cls, graph) -> "Extents":
        dec = graph.decomp
        lat = dec.lattice
        n = dec.n_domains
        sd = dec.site_domain
        r, c = lat.coords[:, 0], lat.coords[:, 1]
        rmin = np.full(n, np.iinfo(np.int64).max)
        cmin = rmin.copy()
        rmax = np.full(n, -1)
        cmax = rmax.copy()
        np.minimum.at(rmin, sd, r)
        np.maximum.at(rmax, sd, r)
        np.minimum.at(cmin, sd, c)
        np.maximum.at(cmax, sd, c)
        rc = graph.rep_coords
        rep = {v: (float(rc[v, 0]), float(rc[v, 1])) for v in range(n)}
        box = {v: (int(rmin[v]), int(rmax[v]), int(cmin[v]), int(cmax[v])) for v in range(n)}
        return cls(rep, box, lat.rows, lat.cols)

    @classmethod
    def from_coords(cls, coords: dict[int, tuple[float, float]], rows: int, cols: int) -> "Extents":
        box = {v: (int(r), int(r), int(c), int(c)) for v, (r, c) in coords.items()}
        return cls(dict(coords), box, rows, cols)


@dataclass
class Net:
    l: int
    row_bands: list[tuple[int, int]]
    col_bands: list[tuple[int, int]]
    horizontal: list[list[int]]
    vertical: list[list[int]]
    removed: list[int] = field(default_factory=list)
    reserve: dict[tuple[int, int], set[int]] = field(default_factory=dict)

    @property
    def vertices(self) -> set[int]:
        return {v for p in self.horizontal + self.vertical for v in p}


def _band_path(rg: RewritableGraph, members: set[int], sources: set[int], targets: set[int]):
    """Shortest path from ``sources`` to ``targets`` inside ``members`` (BFS, smallest ids first)."""
    parent: dict[int, int | None] = {}
    frontier = sorted(s for s in sources if s in members)
    for s in frontier:
        parent[s] = None
    hit = next((s for s in frontier if s in targets), None)
    while frontier and hit is None:
        nxt = []
        for u in frontier:
            for w in sorted(rg.adj[u]):
                if w in members and w not in parent:
                    parent[w] = u
                    nxt.append(w)
                    if w in targets and hit is None:
                        hit = w
        frontier = nxt
    if hit is None:
        return None
    path = [hit]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def carve_net(
    rg: RewritableGraph,
    extents: Extents,
    l: int,
    pitch_factor: float = PITCH_FACTOR,
    aspect: float = COLUMN_ASPECT,
    reserve: bool = True,
) -> Net:
    """Find one traversing path per band and Z-measure every vertex off the net.

    Horizontal bands are ``l`` rows high and crossed from column 0 to the last
    column; vertical bands are ``round(aspect * l)`` columns wide and crossed
    from row 0 to the last row.  Band starts are ``pitch_factor`` widths
    apart.  A vertex belongs to a band when one of its sites lies inside it.

    With ``reserve`` the off-net vertices inside each band intersection are
    kept (as ``net.reserve``) for junction cleaning, which Z-measures the ones
    it does not use.  Z measurements commute with the later rewrites on other
    vertices, so postponing them does not change the outcome graph.
    """
    lc = max(1, round(aspect * l))
    rows = band_layout(extents.rows, l, round(pitch_factor * l))
    cols = band_layout(extents.cols, lc, round(pitch_factor * lc))
    if len(rows) < 2 or len(cols) < 2:
        raise PipelineFailure(FailureReport("carve", f"lattice too small for l={l}"))
    present = set(rg.adj)
    box = extents.box
    horizontal, vertical = [], []
    for i, (a, b) in enumerate(rows):
        members = {v for v in present if box[v][0] < b and box[v][1] >= a}
        src = {v for v in members if box[v][2] == 0}
        dst = {v for v in members if box[v][3] == extents.cols - 1}
        path = _band_path(rg, members, src, dst)
        if path is None:
            raise PipelineFailure(FailureReport("carve", "no traversing path", ("row", i)))
        horizontal.append(path)
    for j, (a, b) in enumerate(cols):
        members = {v for v in present if box[v][2] < b and box[v][3] >= a}
        src = {v for v in members if box[v][0] == 0}
        dst = {v for v in members if box[v][1] == extents.rows - 1}
        path = _band_path(rg, members, src, dst)
        if path is None:
            raise PipelineFailure(FailureReport("carve", "no traversing path", ("col", j)))
        vertical.append(path)
    net = Net(l, rows, cols, horizontal, vertical)
    keep = net.vertices
    if reserve:
        taken: set[int] = set(keep)
        for i, (ra, rb) in enumerate(rows):
            for j, (ca, cb) in enumerate(cols):
                square = {
                    v
                    for v in present - taken
                    if box[v][0] < rb and box[v][1] >= ra and box[v][2] < cb and box[v][3] >= ca
                }
                net.reserve[(i, j)] = square
                taken |= square
        keep = taken
    for v in sorted(present - keep):
        rg.measure_z(v)
        net.removed.append(v)
    return net


def clean_wire(rg: RewritableGraph, wire: list[int]) -> list[int]:
    """Remove chords inside a wire by deleting the vertices they bypass.

    Starting at the left end, jump to the rightmost wire vertex adjacent to
    the current one and Z-measure everything skipped; repeat until the right
    end.  Returns the cleaned wire.
    """
    pos = {v: k for k, v in enumerate(wire)}
    out = [wire[0]]
    k = 0
    while k < len(wire) - 1:
        v = wire[k]
        nxt = max((pos[w] for w in rg.adj[v] if w in pos and pos[w] > k), default=None)
        if nxt is None:
            raise PipelineFailure(FailureReport("clean", "wire is disconnected", (v,)))
        for skipped in wire[k + 1 : nxt]:
            if skipped in rg:
                rg.measure_z(skipped)
        k = nxt
        out.append(wire[k])
    return out


DIRECTIONS = ("left", "right", "up", "down")


@dataclass
class Crossing:
    i: int
    j: int
    h_range: tuple[int, int]
    v_range: tuple[int, int]
    center: int | None = None
    arms: dict[str, list[int]] = field(default_factory=dict)
    method: str = ""


@dataclass
class Skeleton:
    """Grid nodes and the wires joining them after junction cleaning."""

    shape: tuple[int, int]
    nodes: dict[tuple[int, int], list[int]]
    crossings: list[Crossing]


def _involved(path: list[int], other: set[int], rg: RewritableGraph) -> list[int]:
    return [k for k, x in enumerate(path) if x in other or rg.adj[x] & other]


def _grow(rg: RewritableGraph, start: int, goal: int, allowed: set[int], used: set[int]):
    """Shortest path ``start -> goal`` whose new vertices touch ``used`` only at ``start``."""
    parent = {start: None}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in sorted(rg.adj[u]):
            if w in parent or w not in allowed or w in used:
                continue
            if (rg.adj[w] & used) - {start}:
                continue
            parent[w] = u
            if w == goal:
                path = [w]
                while parent[path[-1]] != start:
                    path.append(parent[path[-1]])
                return path[::-1]
            queue.append(w)
    return None


def _tree_is_induced(rg: RewritableGraph, chains: list[list[int]]) -> bool:
    verts = {v for ch in chains for v in ch}
    expected = {(min(x, y), max(x, y)) for ch in chains for x, y in zip(ch, ch[1:])}
    actual = {(min(x, y), max(x, y)) for x in verts for y in rg.adj[x] if y in verts}
    return actual == expected and sum(len(ch) - 1 for ch in chains) == len(verts) - 1


def _attach_arms(rg, root, dirs, exits, allowed, used):
    arms = {}
    for d in dirs:
        others = {exits[e] for e in exits if e != d}
        path = _grow(rg, root, exits[d], allowed - others, used)
        if path is None:
            return None
        arms[d] = path
        used |= set(path)
    return arms


def _spider(rg: RewritableGraph, core: list[int], exits: dict[str, int]):
    """Centre and arms of an induced subdivided star joining ``exits`` inside ``core``.

    Tries every centre in ``core`` and every order of building the arms; each
    arm is a shortest path avoiding earlier arms and their neighbourhoods.
    """
    allowed = set(core) | set(exits.values())
    dirs = sorted(exits)
    for c in core:
        for order in itertools.permutations(dirs):
            arms = _attach_arms(rg, c, order, exits, allowed, {c})
            if arms is not None and _tree_is_induced(rg, [[c] + a for a in arms.values()]):
                return c, arms
    return None


def _double_t(rg: RewritableGraph, core: list[int], exits: dict[str, int]):
    """Two junctions ``j1``, ``j2`` joined by a link of at least one interior vertex.

    The exits are split between the junctions two and two (or fewer at the
    boundary); the whole structure must be an induced tree.  Returns
    ``(link, arms1, arms2)`` with ``link = [j1, ..., j2]``.
    """
    allowed = set(core) | set(exits.values())
    dirs = sorted(exits)
    splits = []
    for k in range(1, len(dirs)):
        for first in itertools.combinations(dirs, k):
            rest = tuple(d for d in dirs if d not in first)
            splits.append((first, rest))
    for j1 in core:
        for j2 in core:
            if j2 == j1 or j2 in rg.adj[j1]:
                continue
            link = _grow(rg, j1, j2, set(core), {j1})
            if link is None or len(link) < 2:
                continue
            link = [j1] + link
            for first, rest in splits:
                for o1 in itertools.permutations(first):
                    used = set(link)
                    arms1 = _attach_arms(rg, j1, o1, exits, allowed, used)
                    if arms1 is None:
                        continue
                    arms2 = _attach_arms(rg, j2, rest, exits, allowed, used)
                    if arms2 is None:
                        continue
                    chains = [link] + [[j1] + a for a in arms1.values()] + [[j2] + a for a in arms2.values()]
                    if _tree_is_induced(rg, chains):
                        return link, arms1, arms2
    return None


def _local_copy(rg: RewritableGraph, verts: set[int]) -> RewritableGraph:
    return RewritableGraph({v: rg.adj[v] & verts for v in verts})


def _assisted_spider(rg: RewritableGraph, core: list[int], exits: dict[str, int], depth: int = 2):
    """Spider search after Y-measuring up to ``depth`` core vertices.

    Y measurements only rewire edges among the neighbours of the measured
    vertex, all of which lie in the core or are exits, so the search runs on
    a local copy.  Returns ``(ys, centre, arms)``.
    """
    verts = set(core) | set(exits.values())
    for k in range(1, depth + 1):
        for ys in itertools.combinations(core, k):
            local = _local_copy(rg, verts)
            for y in ys:
                local.measure_y(y)
            rest = [v for v in core if v not in ys]
            found = _spider(local, rest, exits)
            if found is not None:
                return list(ys), found[0], found[1]
    return None


def merge_along(rg: RewritableGraph, path: list[int]) -> int:
    """Merge the first vertex of an induced path into the last one.

    With an even number (> 0) of interior vertices the first interior vertex is
    Y-measured to make the count odd; X-pairs then move the first vertex two
    steps at a time until it reaches the last.  Returns the merged vertex.
    """
    a, *interior, b = path
    if not interior:
        raise RewriteError(f"cannot merge adjacent vertices {a} and {b}")
    if len(interior) % 2 == 0:
        rg.measure_y(interior[0])
        interior = interior[1:]
    while interior:
        a = rg.measure_x_pair(a, interior[0])
        interior = interior[2:]
    if a != b:
        raise RewriteError("merge did not reach the end of the path")
    return b


def shorten_wire(rg: RewritableGraph, path: list[int]) -> None:
    """Contract a wire ``c1 - p1 .. pm - c2`` to the single edge ``c1 - c2``.

    An odd interior count is first made even by Y-measuring ``p1``; then
    X-pairs on ``(p1, p2)`` remove two interior vertices at a time.
    """
    c1, *interior, c2 = path
    if len(interior) % 2 == 1:
        rg.measure_y(interior[0])
        interior = interior[1:]
    while interior:
        rg.measure_x_pair(interior[0], interior[1])
        interior = interior[2:]
    if c2 not in rg.adj[c1]:
        raise RewriteError("wire contraction did not join its ends")


def _measure_rest(rg: RewritableGraph, core, keep) -> None:
    for v in core:
        if v not in keep and v in rg:
            rg.measure_z(v)


def _pad_windows(row: list[Crossing], attr: str, length: int, pad: int) -> None:
    """Grow consecutive windows on one path by up to ``pad`` vertices, keeping an exit between them."""
    spans = [list(getattr(c, attr)) for c in row]
    spans[0][0] = max(0, spans[0][0] - pad)
    spans[-1][1] = min(length - 1, spans[-1][1] + pad)
    for a, b in zip(spans, spans[1:]):
        gap = b[0] - a[1] - 1
        p = min(pad, (gap - 1) // 2)
        a[1] += p
        b[0] -= p
    for c, sp in zip(row, spans):
        setattr(c, attr, tuple(sp))


def clean_wires_and_junctions(rg: RewritableGraph, net: Net, pad: int = WINDOW_PAD) -> Skeleton:
    """Reduce the net to degree-4 (or boundary degree-3/2) crossings joined by simple wires.

    Raises :class:`PipelineFailure` if two crossings are not separated along a
    path or a crossing cannot be cleaned.
    """
    H = [clean_wire(rg, p) for p in net.horizontal]
    V = [clean_wire(rg, p) for p in net.vertical]
    ni, nj = len(H), len(V)
    crossings: dict[tuple[int, int], Crossing] = {}
    for i in range(ni):
        hset = set(H[i])
        for j in range(nj):
            vset = set(V[j])
            hk = _involved(H[i], vset, rg)
            vk = _involved(V[j], hset, rg)
            if not hk or not vk:
                raise PipelineFailure(FailureReport("clean", "paths do not meet", (i, j)))
            crossings[(i, j)] = Crossing(i, j, (hk[0], hk[-1]), (vk[0], vk[-1]))
    # separation along every path
    for i in range(ni):
        for j in range(nj - 1):
            a, b = crossings[(i, j)].h_range, crossings[(i, j + 1)].h_range
            if not a[1] + 1 <= b[0] - 1:
                raise PipelineFailure(FailureReport("clean", "junctions not separated", ("row", i, j)))
    for j in range(nj):
        for i in range(ni - 1):
            a, b = crossings[(i, j)].v_range, crossings[(i + 1, j)].v_range
            if not a[1] + 1 <= b[0] - 1:
                raise PipelineFailure(FailureReport("clean", "junctions not separated", ("col", i, j)))
    # widen each window into the slack on both sides
    if pad:
        for i in range(ni):
            _pad_windows([crossings[(i, j)] for j in range(nj)], "h_range", len(H[i]), pad)
        for j in range(nj):
            _pad_windows([crossings[(i, j)] for i in range(ni)], "v_range", len(V[j]), pad)
    # paths of the same orientation must not touch
    for group, name in ((H, "row"), (V, "col")):
        owner = {v: k for k, p in enumerate(group) for v in p}
        for k, p in enumerate(group):
            for v in p:
                for w in rg.adj[v]:
                    if owner.get(w, k) != k:
                        raise PipelineFailure(FailureReport("clean", "parallel paths touch", (name, k)))
    # tails beyond the outermost crossings
    for i in range(ni):
        lo, hi = crossings[(i, 0)].h_range[0], crossings[(i, nj - 1)].h_range[1]
        for v in H[i][:lo] + H[i][hi + 1 :]:
            if v in rg:
                rg.measure_z(v)
    for j in range(nj):
        lo, hi = crossings[(0, j)].v_range[0], crossings[(ni - 1, j)].v_range[1]
        for v in V[j][:lo] + V[j][hi + 1 :]:
            if v in rg:
                rg.measure_z(v)
    nodes = {}
    for (i, j), cr in sorted(crossings.items()):
        h0, h1 = cr.h_range
        v0, v1 = cr.v_range
        base = set(H[i][h0 : h1 + 1]) | set(V[j][v0 : v1 + 1])
        exits = {}
        if j > 0:
            exits["left"] = H[i][h0 - 1]
        if j < nj - 1:
            exits["right"] = H[i][h1 + 1]
        if i > 0:
            exits["up"] = V[j][v0 - 1]
        if i < ni - 1:
            exits["down"] = V[j][v1 + 1]
        square = net.reserve.get((i, j), set())
        extra = _eligible_reserve(rg, square, base, exits)
        for v in sorted(square - extra):
            if v in rg:
                rg.measure_z(v)
        c, arms, method = _resolve_crossing(rg, sorted(base), sorted(base | extra), exits, (i, j))
        cr.method = method
        cr.center, cr.arms = c, arms
        # the reserve left over here is already measured; the rest is in the arms
        square.clear()
        nodes[(i, j)] = [c]
    for square in net.reserve.values():
        for v in sorted(square):
            if v in rg:
                rg.measure_z(v)
    return Skeleton((ni, nj), nodes, [crossings[k] for k in sorted(crossings)])


def _eligible_reserve(rg: RewritableGraph, square: set[int], base: set[int], exits: dict[str, int]) -> set[int]:
    """Reserve vertices whose whole neighbourhood stays inside the crossing region."""
    extra = {v for v in square if v in rg}
    while True:
        region = base | extra | set(exits.values())
        bad = {v for v in extra if not rg.adj[v] <= region}
        if not bad:
            return extra
        extra -= bad


def _resolve_crossing(rg, base, core, exits, where):
    """Apply the first junction reduction that succeeds; returns ``(centre, arms, method)``.

    Order: induced spider on the path vertices, then with the reserve, then
    after one Y measurement, then two junctions merged along a link.
    """
    for cand, method in ((base, "spider"), (core, "spider+reserve")):
        found = _spider(rg, cand, exits)
        if found is not None:
            c, arms = found
            _measure_rest(rg, core, {c} | {v for a in arms.values() for v in a})
            return c, arms, method
    assisted = _assisted_spider(rg, core, exits, depth=1)
    if assisted is not None:
        ys, c, arms = assisted
        for y in ys:
            rg.measure_y(y)
        _measure_rest(rg, core, {c} | {v for a in arms.values() for v in a})
        return c, arms, "y-spider"
    pair = _double_t(rg, core, exits)
    if pair is None:
        raise PipelineFailure(FailureReport("clean", "crossing cannot be reduced", where))
    link, arms1, arms2 = pair
    keep = set(link) | {v for a in (*arms1.values(), *arms2.values()) for v in a}
    _measure_rest(rg, core, keep)
    c = merge_along(rg, link)
    return c, {**arms1, **arms2}, "double-t"


def resolve_junction(rg: RewritableGraph, centre_wire: list[int], cross_wire: list[int]):
    """Clear the chords between the stem of a T-junction and its crossbar.

    ``centre_wire`` runs towards the junction and ends at it; the junction
    also lies on ``cross_wire``.  The first stem vertex ``v`` touching the
    crossbar is found, the stem between ``v`` and the junction is deleted and
    one of three cases applies: a single crossbar neighbour becomes the new
    junction; two adjacent ones are split by a Y measurement on ``v`` (its stem
    predecessor becomes the junction); otherwise the crossbar between the
    outermost neighbours is deleted and ``v`` becomes the junction.

    Returns ``(centre_wire, cross_wire, junction)``.
    """
    junction = centre_wire[-1]
    cross_pos = {w: k for k, w in enumerate(cross_wire)}
    if junction not in cross_pos:
        raise RewriteError("junction is not on the crossing wire")
    stem = centre_wire[:-1]
    hit = None
    for k, v in enumerate(stem):
        touching = {w for w in rg.adj[v] if w in cross_pos} - ({junction} if k == len(stem) - 1 else set())
        if touching:
            hit = k
            break
    if hit is None:
        return centre_wire, cross_wire, junction
    v = stem[hit]
    for u in stem[hit + 1 :]:
        rg.measure_z(u)
    stem = stem[: hit + 1]
    nbrs = sorted((w for w in rg.adj[v] if w in cross_pos), key=cross_pos.get)
    if len(nbrs) == 1:
        (w,) = nbrs
        return stem + [w], cross_wire, w
    lo, hi = cross_pos[nbrs[0]], cross_pos[nbrs[-1]]
    if len(nbrs) == 2 and hi == lo + 1:
        if hit == 0:
            raise RewriteError("stem too short to split the junction")
        u = stem[hit - 1]
        rg.measure_y(v)
        cross = cross_wire[: lo + 1] + [u] + cross_wire[hi:]
        return stem[:hit], cross, u
    for w in cross_wire[lo + 1 : hi]:
        if w in rg:
            rg.measure_z(w)
    cross = cross_wire[: lo + 1] + [v] + cross_wire[hi:]
    return stem, cross, v


def _walk(rg: RewritableGraph, start: int, first: int, stops: set[int]) -> list[int]:
    """Follow a wire from ``start`` through ``first`` until a stop or a non-degree-2 vertex."""
    path = [start, first]
    while path[-1] not in stops and rg.degree(path[-1]) == 2:
        (nxt,) = rg.adj[path[-1]] - {path[-2]}
        if nxt == start and len(path) > 2:
            break
        path.append(nxt)
    return path


def merge_ring(rg: RewritableGraph, ring: list[int]) -> int:
    """Turn a ring of four junctions ``[a, b, c, d]`` (cyclic order) into one vertex.

    The ``a - b`` segment is Z-measured; ``a`` is then merged into ``d``,
    the result into ``c`` and finally into ``b``.  Returns ``b``.
    """
    if len(ring) != 4 or len(set(ring)) != 4:
        raise RewriteError("a ring needs four distinct junctions")
    stops = set(ring)

    def segment(x, y):
        for n in sorted(rg.adj[x]):
            seg = _walk(rg, x, n, stops)
            if seg[-1] == y:
                return seg
        raise RewriteError(f"no ring segment between {x} and {y}")

    a, b, c, d = ring
    ab = segment(a, b)
    if len(ab) < 3:
        raise RewriteError(f"ring junctions {a} and {b} are neighbours")
    for v in ab[1:-1]:
        rg.measure_z(v)
    segs = [segment(a, d), segment(d, c), segment(c, b)]
    merged = a
    for seg in segs:
        merged = merge_along(rg, [merged] + seg[1:])
    return merged


@dataclass
class GridCertificate:
    """Claim that the surviving vertices form a ``height x width`` grid under ``mapping``."""

    width: int
    height: int
    mapping: dict[int, tuple[int, int]]

    @property
    def size(self) -> int:
        return min(self.width, self.height)

    def verify(self, rg: RewritableGraph) -> bool:
        """Compare the final adjacency with an independently built grid graph."""
        import networkx as nx

        if set(self.mapping) != set(rg.adj):
            return False
        if len(set(self.mapping.values())) != len(self.mapping):
            return False
        grid = nx.grid_2d_graph(self.height, self.width)
        if set(self.mapping.values()) != set(grid.nodes):
            return False
        actual = {frozenset((self.mapping[u], self.mapping[v])) for u, v in rg.edges()}
        expected = {frozenset(e) for e in grid.edges}
        return actual == expected

    def as_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "mapping": {str(v): list(rc) for v, rc in sorted(self.mapping.items())},
        }


def contract_to_grid(
    rg: RewritableGraph,
    layout: dict[tuple[int, int], list[int]],
    square: bool = True,
) -> GridCertificate:
    """Contract junction rings and the wires between them to a square grid.

    ``layout`` maps grid positions to either one junction vertex or a ring of
    four.  Each wire between grid neighbours is contracted to a single edge;
    with ``square`` the longer side is then trimmed by Z measurements.
    Raises :class:`RewriteError` naming the offending ring or wire.
    """
    if not layout:
        raise RewriteError("empty layout")
    height = 1 + max(i for i, _ in layout)
    width = 1 + max(j for _, j in layout)
    if set(layout) != {(i, j) for i in range(height) for j in range(width)}:
        raise RewriteError("layout does not cover a full rectangle")
    centre = {}
    for pos, verts in sorted(layout.items()):
        if len(verts) == 1:
            centre[pos] = verts[0]
        elif len(verts) == 4:
            try:
                centre[pos] = merge_ring(rg, verts)
            except RewriteError as err:
                raise RewriteError(f"ring at {pos}: {err}") from err
        else:
            raise RewriteError(f"node at {pos} must be one vertex or a ring of four")
    where = {v: pos for pos, v in centre.items()}
    stops = set(where)
    for (i, j), c in sorted(centre.items()):
        for n in sorted(rg.adj[c]):
            wire = _walk(rg, c, n, stops)
            end = wire[-1]
            if end not in where:
                raise RewriteError(f"wire from {(i, j)} ends at non-junction vertex {end}")
            di, dj = where[end][0] - i, where[end][1] - j
            if abs(di) + abs(dj) != 1:
                raise RewriteError(f"wire joins non-adjacent nodes {(i, j)} and {where[end]}")
            if (di, dj) in ((1, 0), (0, 1)) and len(wire) > 2:
                shorten_wire(rg, wire)
    if square:
        side = min(height, width)
        for (i, j), c in sorted(centre.items()):
            if i >= side or j >= side:
                rg.measure_z(c)
        height = width = side
    mapping = {c: pos for pos, c in centre.items() if c in rg}
    return GridCertificate(width, height, mapping)


@dataclass
class PipelineResult:
    ok: bool
    graph: RewritableGraph
    l: int
    certificate: GridCertificate | None = None
    failure: FailureReport | None = None
    stages: list[dict] = field(default_factory=list)
    graph_hash: str = ""
    verified: bool = False

    @property
    def size(self) -> int:
        return self.certificate.size if self.certificate else 0

    def report(self) -> dict:
        return {
            "graph_hash": self.graph_hash,
            "l": self.l,
            "ok": self.ok,
            "stages": self.stages,
            "failure": self.failure.as_dict() if self.failure else None,
            "lambda_prime": self.size,
            "verified": self.verified,
            "log_length": len(self.graph.log),
        }


def graph_hash(rg: RewritableGraph) -> str:
    import hashlib

    h = hashlib.sha256()
    for v in sorted(rg.adj):
        h.update(f"{v}:".encode())
        h.update(",".join(map(str, sorted(rg.adj[v]))).encode())
        h.update(b";")
    return h.hexdigest()[:16]


def log_is_consistent(original: set[int], rg: RewritableGraph) -> bool:
    """Every original vertex either survives or was measured exactly once."""
    seen: dict[int, int] = {}
    for v, _ in rg.log:
        seen[v] = seen.get(v, 0) + 1
    return (
        all(c == 1 for c in seen.values())
        and not set(seen) & set(rg.adj)
        and set(seen) | set(rg.adj) == original
    )


def run_pipeline(
    rg: RewritableGraph,
    extents: Extents,
    size: int | None = None,
    c: float = DEFAULT_L_CONST,
    pitch_factor: float = PITCH_FACTOR,
) -> PipelineResult:
    """Carve, clean and contract; failures are reported, never raised."""
    size = size or max(extents.rows, extents.cols)
    l = choose_l(size, c)
    result = PipelineResult(False, rg, l, graph_hash=graph_hash(rg))
    original = set(rg.adj)

    def stage(name):
        result.stages.append({"stage": name, "vertices": rg.n_vertices, "edges": rg.n_edges})

    stage("input")
    try:
        net = carve_net(rg, extents, l, pitch_factor)
        stage("carve")
        skel = clean_wires_and_junctions(rg, net)
        stage("clean")
        try:
            cert = contract_to_grid(rg, skel.nodes)
        except RewriteError as err:
            raise PipelineFailure(FailureReport("contract", str(err))) from err
        stage("contract")
    except PipelineFailure as err:
        result.failure = err.report
        return result
    result.certificate = cert
    result.verified = cert.verify(rg) and log_is_consistent(original, rg)
    result.ok = result.verified and cert.size >= 2
    if not result.verified:
        result.failure = FailureReport("verify", "grid certificate rejected")
    return result
