import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aklt_graphs.lattice import (
    build_lattice,
    cut_open,
    full_region,
    named_patch,
    read_edge_list,
    rectangle_sites,
    write_edge_list,
)


def test_smallest_periodic_honeycomb():
    lat = build_lattice("honeycomb", 2, "periodic")
    assert lat.n_sites == 4
    assert lat.n_edges == 6
    assert set(lat.degree.tolist()) == {3}


def test_l4_counts_and_bipartition():
    lat = build_lattice("honeycomb", 4, "periodic")
    assert (lat.n_sites, lat.n_edges) == (16, 24)
    assert np.bincount(lat.sublattice).tolist() == [8, 8]
    assert lat.bipartite


def test_open_hexagon_terminators():
    hexagon = named_patch("hexagon")
    assert hexagon.n_sites == 6
    assert hexagon.n_edges == 6
    assert hexagon.terminators.tolist() == [1] * 6


@pytest.mark.parametrize("L", [2, 4, 6, 10, 20])
def test_periodic_invariants(L):
    lat = build_lattice("honeycomb", L, "periodic")
    assert np.all(lat.degree == 3)
    assert lat.degree.sum() == 2 * lat.n_edges == 3 * lat.n_sites
    s = lat.sublattice
    assert np.all(s[lat.edges[:, 0]] != s[lat.edges[:, 1]])


@given(st.integers(2, 14))
def test_open_degree_plus_terminators(L):
    lat = build_lattice("honeycomb", L, "open")
    assert np.all(lat.degree + lat.terminators == 3)


@given(st.integers(2, 30), st.sampled_from(["periodic", "open"]))
def test_chain_degrees(n, boundary):
    lat = build_lattice("chain1d", n, boundary)
    assert np.all(lat.degree + lat.terminators == 2)
    if boundary == "periodic":
        assert lat.n_edges == n


def test_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_lattice("honeycomb", 5, "periodic")
    with pytest.raises(ValueError):
        build_lattice("honeycomb", 1, "open")
    with pytest.raises(ValueError):
        build_lattice("square", 4, "open")


def test_row_major_enumeration():
    lat = build_lattice("honeycomb", 4, "open")
    assert [tuple(c) for c in lat.coords[:5]] == [(0, 0), (0, 1), (0, 2), (0, 3), (1, 0)]


def test_brick_wall_embedding_has_no_crossings():
    # bonds are unit horizontal or vertical segments on the integer grid, so two
    # of them can only cross if they overlap, which would need a repeated bond
    lat = build_lattice("honeycomb", 8, "open")
    d = np.abs(lat.coords[lat.edges[:, 0]] - lat.coords[lat.edges[:, 1]]).sum(axis=1)
    assert np.all(d == 1)
    assert len({tuple(e) for e in lat.edges.tolist()}) == lat.n_edges


def test_rectangles():
    lat4 = build_lattice("honeycomb", 4, "periodic")
    assert len(full_region(lat4).sites) == 16
    assert len(rectangle_sites(lat4, (0, 1), 1, 4).sites) == 4
    lat8 = build_lattice("honeycomb", 8, "periodic")
    r = rectangle_sites(lat8, (0, 0), 2, 4)
    assert len(r.sites) == 8
    assert set(lat8.coords[r.left][:, 1].tolist()) == {0}
    assert set(lat8.coords[r.right][:, 1].tolist()) == {1}
    wrapped = rectangle_sites(lat8, (6, 6), 4, 4)
    assert len(wrapped.sites) == 16
    with pytest.raises(ValueError):
        rectangle_sites(lat8, (0, 0), 0, 3)
    with pytest.raises(ValueError):
        rectangle_sites(build_lattice("honeycomb", 4, "open"), (2, 2), 4, 4)


def test_cut_open_drops_wrap_bonds():
    lat = build_lattice("honeycomb", 6, "periodic")
    cut = cut_open(lat)
    assert cut.boundary == "cut"
    assert cut.n_edges == lat.n_edges - int((lat.wrap != 0).sum())
    assert cut.n_terminators == 0


def test_edge_list_round_trip(tmp_path):
    lat = build_lattice("honeycomb", 4, "periodic")
    path = tmp_path / "lat.txt"
    write_edge_list(lat, path)
    assert path.read_text().splitlines()[0] == "# honeycomb 4 periodic 16 24"
    meta, edges = read_edge_list(path)
    assert meta["N"] == 16
    assert np.array_equal(edges, lat.edges)
