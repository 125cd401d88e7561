"""Per-graph observables, spanning tests and aggregation with error bars."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .domains import DomainDecomposition, GraphState, build_graph, label_domains
from .lattice import Lattice, Region, cut_open, full_region


@dataclass(frozen=True)
class GraphStats:
    n_vertices: int
    n_edges: int
    n_edges_pre: int
    components: int
    betti: int
    mean_degree: float
    domain_mean: float
    domain_std: float
    largest_domain: int
    spanning_h: bool
    spanning_v: bool


STAT_FIELDS = [f.name for f in fields(GraphStats)]


def n_components(graph: GraphState) -> int:
    if graph.n_vertices == 0:
        return 0
    return int(connected_components(graph.adjacency, directed=False)[0])


def compute_stats(
    graph: GraphState, decomp: DomainDecomposition, lattice: Lattice, spanning: bool = True
) -> GraphStats:
    """All observables of one sampled graph.

    Spanning flags refer to the cut-open lattice: periodic wrap bonds are
    removed and domains relabelled before testing left-right and top-bottom
    crossings.
    """
    nv = graph.n_vertices
    ne = graph.n_edges
    comps = n_components(graph)
    span_h = span_v = False
    if spanning:
        span_h, span_v = crossing_flags(lattice, decomp.config)
    sizes = decomp.size
    return GraphStats(
        n_vertices=nv,
        n_edges=ne,
        n_edges_pre=decomp.n_inter,
        components=comps,
        betti=ne - nv + comps,
        mean_degree=2.0 * ne / nv if nv else 0.0,
        domain_mean=float(sizes.mean()),
        domain_std=float(sizes.std()),
        largest_domain=int(sizes.max()),
        spanning_h=bool(span_h),
        spanning_v=bool(span_v),
    )


def stats_for_config(lattice: Lattice, config: np.ndarray, spanning: bool = True) -> GraphStats:
    decomp = label_domains(lattice, config)
    return compute_stats(build_graph(decomp), decomp, lattice, spanning=spanning)


def crossing_flags(lattice: Lattice, config: np.ndarray) -> tuple[bool, bool]:
    """Horizontal and vertical crossing on the cut-open lattice."""
    cut = cut_open(lattice)
    if cut is lattice:
        graph = build_graph(label_domains(lattice, config))
    else:
        graph = build_graph(label_domains(cut, config))
    region = full_region(cut)
    return (
        spanning_exists(graph, cut, region, "horizontal"),
        spanning_exists(graph, cut, region, "vertical"),
    )


def region_graph(graph: GraphState, lattice: Lattice, region: Region):
    """Vertices meeting ``region`` and the graph edges realised by a bond inside it.

    Returns ``(vertex mask, edge array)``.  A bond is inside the region when
    both endpoints are region sites and it joins neighbouring cells of the
    rectangle (so periodic seam bonds of a full-width region are excluded).
    """
    decomp = graph.decomp
    if decomp is None:
        raise ValueError("graph has no underlying decomposition")
    n = lattice.n_sites
    sd = decomp.site_domain
    mask_sites = region.mask(n)
    in_region = np.zeros(graph.n_vertices, dtype=bool)
    in_region[sd[region.sites]] = True

    r0, c0 = region.origin
    dr = (lattice.coords[:, 0] - r0) % max(lattice.rows, 1)
    dc = (lattice.coords[:, 1] - c0) % max(lattice.cols, 1)
    e = lattice.edges
    local = (
        mask_sites[e[:, 0]]
        & mask_sites[e[:, 1]]
        & (np.abs(dr[e[:, 0]] - dr[e[:, 1]]) <= 1)
        & (np.abs(dc[e[:, 0]] - dc[e[:, 1]]) <= 1)
    )
    da, db = sd[e[local, 0]], sd[e[local, 1]]
    inter = da != db
    realised = np.unique(np.minimum(da, db)[inter] * graph.n_vertices + np.maximum(da, db)[inter])
    g_keys = graph.edges[:, 0] * graph.n_vertices + graph.edges[:, 1]
    usable = graph.edges[np.isin(g_keys, realised)]
    return in_region, usable


def spanning_exists(graph: GraphState, lattice: Lattice, region: Region, direction: str) -> bool:
    """Is there a path inside ``region`` from its left to its right side (``horizontal``) or top to bottom?"""
    if region.width < 1 or region.height < 1 or len(region.sites) == 0:
        raise ValueError("degenerate region")
    if direction == "horizontal":
        side_a, side_b = region.left, region.right
    elif direction == "vertical":
        side_a, side_b = region.top, region.bottom
    else:
        raise ValueError(f"direction must be 'horizontal' or 'vertical', got {direction!r}")
    in_region, usable = region_graph(graph, lattice, region)
    sd = graph.decomp.site_domain
    alive = graph.alive_mask
    a = np.unique(sd[side_a])
    b = np.unique(sd[side_b])
    a, b = a[alive[a]], b[alive[b]]
    if len(a) == 0 or len(b) == 0:
        return False
    nv = graph.n_vertices
    adj = coo_matrix(
        (np.ones(len(usable), dtype=np.int8), (usable[:, 0], usable[:, 1])), shape=(nv, nv)
    )
    _, comp = connected_components(adj, directed=False)
    return bool(np.intersect1d(comp[a], comp[b]).size)


# --------------------------------------------------------------------------
# aggregation


def autocorrelation_time(x: np.ndarray) -> float:
    """Integrated autocorrelation time, summing the ACF up to its first non-positive value."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 4 or np.var(x) == 0:
        return 0.5
    y = x - x.mean()
    f = np.fft.rfft(y, 2 * n)
    acf = np.fft.irfft(f * np.conj(f))[:n]
    acf /= acf[0]
    tau = 0.5
    for t in range(1, n // 2):
        if acf[t] <= 0:
            break
        tau += acf[t]
    return float(tau)


def blocking_error(x: Sequence[float]) -> tuple[float, int]:
    """Standard error of the mean from blocks of at least ``10 * tau`` samples.

    Returns ``(error, block size)``.  At least four blocks are always kept.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    if n < 2:
        return float("nan"), 1
    block = max(1, math.ceil(10 * autocorrelation_time(x)))
    block = min(block, max(1, n // 4))
    nb = n // block
    means = x[: nb * block].reshape(nb, block).mean(axis=1)
    if nb < 2:
        return float(np.std(x, ddof=1) / math.sqrt(n)), block
    return float(np.std(means, ddof=1) / math.sqrt(nb)), block


def bootstrap_error(x: Sequence[float], block: int = 1, resamples: int = 500, seed: int = 0) -> float:
    """Block-bootstrap standard error of the mean."""
    x = np.asarray(x, dtype=float)
    nb = len(x) // block
    if nb < 2:
        return float("nan")
    means = x[: nb * block].reshape(nb, block).mean(axis=1)
    rng = np.random.default_rng(seed)
    boot = means[rng.integers(0, nb, size=(resamples, nb))].mean(axis=1)
    return float(boot.std(ddof=1))


@dataclass
class Estimate:
    mean: float
    err: float
    bootstrap_err: float
    block: int


@dataclass
class Aggregate:
    L: int
    n_sites: int
    count: int
    estimates: dict[str, Estimate]
    extrapolation: dict | None = field(default=None)

    def __getitem__(self, key: str) -> Estimate:
        return self.estimates[key]

    def density(self, key: str) -> Estimate:
        """``key`` divided by ``L**2`` (the site count of a square honeycomb)."""
        e = self.estimates[key]
        scale = float(self.n_sites)
        return Estimate(e.mean / scale, e.err / scale, e.bootstrap_err / scale, e.block)


DENSITY_FIELDS = ("n_vertices", "n_edges", "n_edges_pre", "betti")


def aggregate(stream: Iterable[GraphStats], L: int, n_sites: int | None = None) -> Aggregate:
    """Means with blocking errors (cross-checked by bootstrap) for every observable."""
    rows = list(stream)
    if not rows:
        raise ValueError("cannot aggregate an empty stream")
    if len(rows) < 2:
        raise ValueError("need at least two samples")
    estimates = {}
    for name in STAT_FIELDS:
        x = np.array([float(getattr(r, name)) for r in rows])
        err, block = blocking_error(x)
        estimates[name] = Estimate(float(x.mean()), err, bootstrap_error(x, block), block)
    return Aggregate(L=L, n_sites=n_sites or L * L, count=len(rows), estimates=estimates)


@dataclass
class LinearFit:
    slope: float
    intercept: float
    slope_err: float
    intercept_err: float
    residuals: np.ndarray


def linear_fit(x: Sequence[float], y: Sequence[float], err: Sequence[float] | None = None) -> LinearFit:
    """Weighted least squares ``y = slope * x + intercept`` with parameter errors."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    A = np.stack([x, np.ones_like(x)], axis=1)
    if err is None or not np.all(np.asarray(err) > 0):
        w = np.ones_like(x)
    else:
        w = 1.0 / np.asarray(err, dtype=float)
    coef, *_ = np.linalg.lstsq(A * w[:, None], y * w, rcond=None)
    resid = y - A @ coef
    dof = len(x) - 2
    cov = np.linalg.pinv((A * w[:, None]).T @ (A * w[:, None]))
    if err is None:
        # scale by residual variance when no per-point errors are given
        s2 = float(resid @ resid) / dof if dof > 0 else 0.0
        cov = cov * s2
    return LinearFit(
        slope=float(coef[0]),
        intercept=float(coef[1]),
        slope_err=float(math.sqrt(max(cov[0, 0], 0.0))),
        intercept_err=float(math.sqrt(max(cov[1, 1], 0.0))),
        residuals=resid,
    )


def extrapolate(aggs: Sequence[Aggregate], key: str, density: bool = True) -> LinearFit:
    """Fit ``value = a + b / L`` and return the fit; ``intercept`` is the ``L -> inf`` limit."""
    if len(aggs) < 2:
        raise ValueError("need at least two sizes to extrapolate")
    est = [a.density(key) if density else a[key] for a in aggs]
    x = [1.0 / a.L for a in aggs]
    return linear_fit(x, [e.mean for e in est], [e.err for e in est])


def fit_largest_domain(aggs: Sequence[Aggregate]) -> LinearFit:
    """Least-squares fit of the mean largest-domain size against ``ln N``."""
    sizes = {a.n_sites for a in aggs}
    if len(sizes) < 3:
        raise ValueError("need at least three distinct lattice sizes")
    x = [math.log(a.n_sites) for a in aggs]
    y = [a["largest_domain"].mean for a in aggs]
    return linear_fit(x, y)


# --------------------------------------------------------------------------
# output


def write_samples_csv(rows: Iterable[tuple[int, GraphStats]], path: str | Path, L: int) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["L", "sweep", *STAT_FIELDS])
        for sweep, s in rows:
            w.writerow([L, sweep, *(_fmt(getattr(s, k)) for k in STAT_FIELDS)])


def write_samples_jsonl(rows: Iterable[tuple[int, GraphStats]], path: str | Path, L: int) -> None:
    with open(path, "w") as fh:
        for sweep, s in rows:
            fh.write(json.dumps({"L": L, "sweep": sweep, **asdict(s)}) + "\n")


def summary_rows(agg: Aggregate) -> list[dict]:
    rows = []
    for name, e in agg.estimates.items():
        rows.append(
            {
                "L": agg.L,
                "observable": name,
                "mean": e.mean,
                "err": e.err,
                "bootstrap_err": e.bootstrap_err,
                "block": e.block,
                "count": agg.count,
            }
        )
    for name in DENSITY_FIELDS:
        d = agg.density(name)
        rows.append(
            {
                "L": agg.L,
                "observable": f"{name}_per_site",
                "mean": d.mean,
                "err": d.err,
                "bootstrap_err": d.bootstrap_err,
                "block": d.block,
                "count": agg.count,
            }
        )
    return rows


def write_table(rows: list[dict], path: str | Path, fmt: str = "csv") -> None:
    if fmt == "jsonl":
        with open(path, "w") as fh:
            for r in rows:
                fh.write(json.dumps(r) + "\n")
        return
    if not rows:
        Path(path).write_text("")
        return
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(v) for k, v in r.items()})


def write_gnuplot(x: Sequence[float], y: Sequence[float], path: str | Path, header: str = "",
                  err: Sequence[float] | None = None) -> None:
    """Whitespace-separated columns ``x y [err]`` with a ``#`` header line."""
    lines = [f"# {header}"] if header else []
    for i, (a, b) in enumerate(zip(x, y)):
        cols = [_fmt(a), _fmt(b)] + ([_fmt(err[i])] if err is not None else [])
        lines.append(" ".join(cols))
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)
