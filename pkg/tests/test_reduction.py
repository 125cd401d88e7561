import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aklt_graphs.domains import build_graph, label_domains
from aklt_graphs.lattice import build_lattice, cut_open
from aklt_graphs.reduction import (
    GridCertificate,
    Extents,
    RewritableGraph,
    RewriteError,
    band_layout,
    choose_l,
    contract_to_grid,
    log_is_consistent,
    merge_along,
    merge_ring,
    resolve_junction,
    run_pipeline,
    shorten_wire,
)
from aklt_graphs.sampler import ChainParams, run_chain
from netbuild import ring_net


def path_graph(n):
    return RewritableGraph.from_edges(range(n), [(i, i + 1) for i in range(n - 1)])


def n_y(rg):
    return sum(1 for _, b in rg.log if b == "Y")


def test_z_deletes():
    rg = RewritableGraph.from_edges(range(3), [(0, 1), (1, 2), (0, 2)])
    rg.measure_z(1)
    assert rg.edges() == [(0, 2)]
    with pytest.raises(RewriteError):
        rg.measure_z(1)


def test_y_toggles_neighbourhood():
    # star with one existing chord: the chord disappears, the others appear
    rg = RewritableGraph.from_edges(range(4), [(0, 1), (0, 2), (0, 3), (1, 2)])
    rg.measure_y(0)
    assert rg.edges() == [(1, 3), (2, 3)]


def test_x_pair_moves_neighbours():
    rg = RewritableGraph.from_edges(range(6), [(0, 1), (1, 2), (2, 3), (3, 4), (0, 5), (3, 5)])
    right = rg.measure_x_pair(1, 2)
    assert right == 3
    # 3 inherits 1's other neighbour 0; the existing 3-5 edge is untouched
    assert rg.edges() == [(0, 3), (0, 5), (3, 4), (3, 5)]
    with pytest.raises(RewriteError):
        rg.measure_x_pair(0, 3)


def test_x_pair_toggles_shared_neighbour():
    rg = RewritableGraph.from_edges(range(4), [(0, 1), (1, 2), (0, 3), (2, 3)])
    rg.measure_x_pair(0, 1)
    assert rg.edges() == []


@pytest.mark.parametrize("interior,ys", [(1, 1), (2, 0), (3, 1), (4, 0), (7, 1)])
def test_shorten_wire_parity(interior, ys):
    rg = path_graph(interior + 2)
    shorten_wire(rg, list(range(interior + 2)))
    assert rg.edges() == [(0, interior + 1)]
    assert n_y(rg) == ys


@pytest.mark.parametrize("interior", [1, 2, 3, 4, 5])
def test_merge_along(interior):
    rg = RewritableGraph.from_edges(range(interior + 4), [(i, i + 1) for i in range(interior + 3)])
    # 0 - [1 .. interior+2] merged: vertex 1 walks to interior+2
    end = merge_along(rg, list(range(1, interior + 3)))
    assert end == interior + 2
    assert rg.edges() == [(0, end), (end, interior + 3)]


def test_merge_along_rejects_adjacent():
    with pytest.raises(RewriteError):
        merge_along(path_graph(2), [0, 1])


def _junction_graph(chords):
    # stem s0-s1-s2-J, crossbar c0-c1-J-c3-c4
    s0, s1, s2, J, c0, c1, c3, c4 = range(8)
    edges = [(s0, s1), (s1, s2), (s2, J), (c0, c1), (c1, J), (J, c3), (c3, c4)] + chords
    return RewritableGraph.from_edges(range(8), edges), [s0, s1, s2, J], [c0, c1, J, c3, c4]


def test_junction_without_chords_is_untouched():
    rg, stem, cross = _junction_graph([])
    assert resolve_junction(rg, stem, cross) == (stem, cross, 3)
    assert rg.log == []


def test_junction_single_chord():
    rg, stem, cross = _junction_graph([(1, 4)])
    new_stem, new_cross, j = resolve_junction(rg, stem, cross)
    assert j == 4 and new_stem == [0, 1, 4] and new_cross == cross
    assert rg.log == [(2, "Z")]


def test_junction_adjacent_chords():
    rg, stem, cross = _junction_graph([(1, 6), (1, 7)])
    new_stem, new_cross, j = resolve_junction(rg, stem, cross)
    assert j == 0 and new_stem == [0]
    assert new_cross == [4, 5, 3, 6, 0, 7]
    assert 7 not in rg.adj[6] and {6, 7} <= rg.adj[0]
    assert (1, "Y") in rg.log


def test_junction_spread_chords():
    rg, stem, cross = _junction_graph([(1, 4), (1, 6)])
    new_stem, new_cross, j = resolve_junction(rg, stem, cross)
    assert j == 1 and new_cross == [4, 1, 6, 7]
    assert {v for v, _ in rg.log} == {2, 5, 3}
    assert rg.adj[1] == {0, 4, 6}


def test_ring_merge():
    rg, layout = ring_net(1, 1, ring_seg=2)
    ring = layout[(0, 0)]
    centre = merge_ring(rg, ring)
    assert rg.n_vertices == 1 and centre == ring[1]


@pytest.mark.parametrize("wire", [1, 2, 3])
@pytest.mark.parametrize("ring_seg", [1, 2])
def test_ring_net_contracts_to_grid(wire, ring_seg):
    rg, layout = ring_net(3, 3, wire=wire, ring_seg=ring_seg)
    original = set(rg.adj)
    cert = contract_to_grid(rg, layout)
    assert (cert.width, cert.height) == (3, 3)
    assert cert.verify(rg)
    assert log_is_consistent(original, rg)


def test_even_wire_saves_a_y():
    rg1, layout1 = ring_net(3, 3, wire=1)
    contract_to_grid(rg1, layout1)
    rg2, layout2 = ring_net(3, 3, wire=1, even_wire=((0, 0), (0, 1), 2))
    contract_to_grid(rg2, layout2)
    assert n_y(rg1) - n_y(rg2) == 1


def test_rectangle_is_trimmed_to_square():
    rg, layout = ring_net(2, 3, simple=True, wire=3)
    cert = contract_to_grid(rg, layout)
    assert (cert.width, cert.height) == (2, 2)
    assert cert.verify(rg)


def test_contract_rejects_broken_net():
    rg, layout = ring_net(2, 2, simple=True)
    rg.measure_z(sorted(rg.adj[layout[(0, 0)][0]])[0])
    rg.measure_z(sorted(rg.adj[layout[(0, 0)][0]])[0])
    cert = contract_to_grid(rg, layout, square=False)
    assert not cert.verify(rg)


def test_certificate_rejects_wrong_mapping():
    rg, layout = ring_net(2, 2, simple=True, wire=0)
    good = {vs[0]: pos for pos, vs in layout.items()}
    assert GridCertificate(2, 2, good).verify(rg)
    swapped = dict(good)
    a, b = layout[(0, 0)][0], layout[(1, 1)][0]
    swapped[a], swapped[b] = good[b], good[a]
    # the 2x2 grid is a 4-cycle, swapping diagonal corners keeps it valid
    assert GridCertificate(2, 2, swapped).verify(rg)
    rg.measure_z(a)
    assert not GridCertificate(2, 2, good).verify(rg)


def test_band_parameters():
    assert choose_l(64) == 7
    assert band_layout(64, 7, 21) == [(7, 14), (28, 35), (49, 56)]
    assert band_layout(5, 7, 21) == []
    with pytest.raises(ValueError):
        choose_l(1)


@given(st.integers(0, 2**32), st.integers(3, 9))
def test_log_records_each_measured_vertex_once(seed, n):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
    rg = RewritableGraph.from_edges(range(n), edges)
    original = set(rg.adj)
    for _ in range(n):
        alive = sorted(rg.adj)
        if not alive:
            break
        v = alive[int(rng.integers(len(alive)))]
        (rg.measure_y if rng.random() < 0.5 else rg.measure_z)(v)
        assert log_is_consistent(original, rg)


def _sampled(L, seed):
    lat = build_lattice("honeycomb", L, "periodic")
    cfg = run_chain(lat, ChainParams(seed=seed, warmup=200, sweeps=1, interval=1)).samples[0].config
    return build_graph(label_domains(cut_open(lat), cfg))


def test_pipeline_on_sampled_graph():
    g = _sampled(64, 3)
    res = run_pipeline(RewritableGraph.from_graph_state(g), Extents.from_graph_state(g), 64)
    assert res.ok and res.verified and res.size >= 2
    assert res.certificate.verify(res.graph)
    rep = res.report()
    assert [s["stage"] for s in rep["stages"]] == ["input", "carve", "clean", "contract"]


def test_pipeline_reports_failure_instead_of_raising():
    g = _sampled(8, 1)
    res = run_pipeline(RewritableGraph.from_graph_state(g), Extents.from_graph_state(g), 8)
    assert not res.ok
    assert res.failure is not None and res.failure.stage in ("carve", "clean", "contract", "verify")
