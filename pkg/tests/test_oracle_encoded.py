import itertools

import numpy as np
import pytest

from aklt_graphs.domains import build_graph, label_domains, log2_weight
from aklt_graphs.lattice import build_lattice, named_patch
from aklt_graphs.oracle.dense import build_aklt
from aklt_graphs.oracle.encoded import (
    ZeroProbabilityError,
    verify_all_configs,
    verify_domain_decoding,
    verify_encoded_cluster,
)


@pytest.mark.parametrize("n", [3, 4])
@pytest.mark.parametrize("boundary", ["open", "periodic"])
def test_all_chain_configs_encode(n, boundary):
    reports = verify_all_configs(build_lattice("chain1d", n, boundary))
    assert reports and all(r.ok for r in reports)


def test_three_site_open_chain_generator():
    lat = build_lattice("chain1d", 3, "open")
    r = verify_encoded_cluster(lat, (0, 2, 1))
    assert r.ok
    assert r.generator[1] == "Y"


def test_dimer_all_configs():
    reports = verify_all_configs(named_patch("dimer"))
    assert len(reports) == 9
    assert all(r.ok for r in reports)


def test_zero_probability_rejected():
    lat = build_lattice("chain1d", 3, "periodic")
    with pytest.raises(ZeroProbabilityError):
        verify_encoded_cluster(lat, (1, 1, 1))


def _wrong_graph(lat, cfg):
    g = build_graph(label_domains(lat, np.array(cfg, dtype=np.int8)))
    n = g.n_vertices
    present = {tuple(e) for e in g.edges.tolist()}
    for u, v in itertools.combinations(range(n), 2):
        if (u, v) not in present:
            edges = np.array(sorted(present | {(u, v)}), dtype=np.int64)
            return type(g)(n, edges, g.size, g.label, g.decomp, g.alive)
    edges = np.array(sorted(present)[1:], dtype=np.int64).reshape(-1, 2)
    return type(g)(n, edges, g.size, g.label, g.decomp, g.alive)


@pytest.mark.parametrize("cfg", [(0, 1, 2, 0), (0, 1, 0, 1), (2, 2, 0, 1)])
def test_wrong_graph_is_caught(cfg):
    lat = build_lattice("chain1d", 4, "periodic")
    assert verify_encoded_cluster(lat, cfg).ok
    assert not verify_encoded_cluster(lat, cfg, graph=_wrong_graph(lat, cfg)).ok


def test_domain_decoding_keeps_graph():
    lat = build_lattice("chain1d", 5, "open")
    cfg = (2, 2, 2, 0, 1)
    d = label_domains(lat, np.array(cfg, dtype=np.int8))
    big = int(np.argmax(d.size))
    state = build_aklt(lat)
    for kept in d.members(big):
        assert verify_domain_decoding(lat, cfg, big, int(kept), state=state).ok


def test_star_sample_configs():
    lat = named_patch("star")
    state = build_aklt(lat)
    for cfg in [(2, 2, 0, 1), (0, 1, 0, 0), (1, 1, 1, 1), (0, 2, 1, 0)]:
        if log2_weight(label_domains(lat, np.array(cfg, dtype=np.int8))) is None:
            continue
        assert verify_encoded_cluster(lat, cfg, state=state).ok
