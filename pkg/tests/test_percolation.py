import numpy as np
import pytest

from aklt_graphs.domains import build_graph, label_domains
from aklt_graphs.lattice import build_lattice, cut_open, full_region
from aklt_graphs.percolation import (
    CrossingProblem,
    DilutionSpec,
    PercolationCurve,
    critical_values,
    curve_from_critical,
    dilute,
    estimate_threshold,
    spanning_curve,
)
from aklt_graphs.sampler import chain_rng
from aklt_graphs.stats import spanning_exists

L8 = build_lattice("honeycomb", 8, "periodic")


def _configs(n, seed=0):
    rng = np.random.default_rng(seed)
    return [rng.integers(0, 3, size=L8.n_sites).astype(np.int8) for _ in range(n)]


def test_spec_validation():
    with pytest.raises(ValueError):
        DilutionSpec("plaquette")
    with pytest.raises(ValueError):
        DilutionSpec("site", p_delete=1.5)


def test_dilute_extremes():
    g = build_graph(label_domains(L8, L8.sublattice.copy()))
    rng = np.random.default_rng(0)
    assert dilute(g, DilutionSpec("bond", 0.0), rng).n_edges == g.n_edges
    assert dilute(g, DilutionSpec("bond", 1.0), rng).n_edges == 0
    assert dilute(g, DilutionSpec("site", 1.0), rng).n_edges == 0


@pytest.mark.parametrize("mode", ["site", "bond"])
def test_critical_value_agrees_with_direct_dilution(mode):
    cut = cut_open(L8)
    region = full_region(cut)
    for i, cfg in enumerate(_configs(6)):
        prob = CrossingProblem.from_config(L8, cfg)
        u = chain_rng(1, i).random(prob.n_items(mode))
        for direction in ("horizontal", "vertical"):
            pc = prob.critical(mode, u, direction)
            for p in (0.0, 0.2, 0.4, 0.6, 0.8):
                g = prob.graph
                if mode == "site":
                    g = g.subgraph_mask(u >= p)
                else:
                    g = type(g)(g.n_vertices, g.edges[u >= p], g.size, g.label, g.decomp, g.alive)
                assert spanning_exists(g, cut, region, direction) == (pc >= p)


def test_both_is_minimum():
    cfg = _configs(1, 3)[0]
    prob = CrossingProblem.from_config(L8, cfg)
    u = chain_rng(2).random(prob.n_items("site"))
    both = prob.critical("site", u, "both")
    assert both == min(prob.critical("site", u, "horizontal"), prob.critical("site", u, "vertical"))


def test_undiluted_samples_span():
    crit = critical_values(L8, _configs(20), "site", replicates=2, seed=4)
    assert crit.shape == (20, 2)
    assert np.all(crit >= 0.0)


def test_curve_monotone_and_deterministic():
    grid = np.linspace(0, 1, 11)
    a = spanning_curve(L8, _configs(10), grid, "bond", replicates=3, seed=7)
    b = spanning_curve(L8, _configs(10), grid, "bond", replicates=3, seed=7)
    assert np.array_equal(a.p_cluster, b.p_cluster)
    assert np.all(np.diff(a.p_cluster) <= 0)
    assert a.p_cluster[0] == 1.0 and a.n_samples == 30


def test_threshold_interpolation():
    curve = curve_from_critical(np.array([0.3, 0.5, 0.5, 0.7]), [0.2, 0.4, 0.6, 0.8], 8, "site")
    assert curve.p_cluster.tolist() == [1.0, 0.75, 0.25, 0.0]
    th = estimate_threshold(curve)
    assert th.p_delete == pytest.approx(0.5)
    assert th.p_c == pytest.approx(0.5)
    assert th.err > 0
    flat = PercolationCurve(np.array([0.1, 0.2]), np.array([1.0, 0.9]), np.zeros(2), 8, "site", 10)
    with pytest.raises(ValueError):
        estimate_threshold(flat)


def test_empty_grid_rejected():
    with pytest.raises(ValueError):
        spanning_curve(L8, _configs(1), [], "site")
