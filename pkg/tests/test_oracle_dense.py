import dataclasses
import math

import numpy as np
import pytest

from aklt_graphs.domains import label_domains, log2_weight
from aklt_graphs.lattice import build_lattice, named_patch
from aklt_graphs.oracle.dense import (
    QubitBudgetError,
    build_aklt,
    exact_distribution,
    periodic_chain_p0,
    symmetric_projector,
    transfer_matrix_norm,
    verify_povm_completeness,
    weight_formula_residual,
)


@pytest.mark.parametrize("spin", [1.0, 1.5])
def test_povm_completeness(spin):
    assert verify_povm_completeness(spin)


def test_povm_completeness_fails_with_wrong_scale():
    # negative control: rescaling one element breaks the resolution of identity
    assert not verify_povm_completeness(1.5, scale={0: 1.1})


@pytest.mark.parametrize("k", [2, 3])
def test_symmetric_projector(k):
    P = symmetric_projector(k)
    assert np.allclose(P @ P, P)
    assert np.allclose(P, P.conj().T)
    assert round(np.trace(P).real) == k + 1


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_norm_matches_transfer_matrix(n):
    state = build_aklt(build_lattice("chain1d", n, "periodic"))
    assert state.norm2 == pytest.approx(transfer_matrix_norm(n), rel=1e-10)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_periodic_chain_distribution(n):
    lat = build_lattice("chain1d", n, "periodic")
    dist = exact_distribution(lat)
    assert dist.probs.sum() == pytest.approx(1.0, abs=1e-12)
    p0 = periodic_chain_p0(n)
    for a in range(3):
        expected = 2 * p0 if n % 2 == 0 else 0.0
        assert dist.prob([a] * n) == pytest.approx(expected, abs=1e-12)
    assert dist.prob([0] + [1] * (n - 1)) == pytest.approx(p0, rel=1e-10)


def test_p0_closed_forms():
    assert periodic_chain_p0(4) == 1 / 84
    assert periodic_chain_p0(3) == 1 / 24


@pytest.mark.parametrize("n", [3, 4, 5])
def test_open_chain_weight_formula(n):
    dist = exact_distribution(build_lattice("chain1d", n, "open"))
    assert weight_formula_residual(dist) < 1e-9


def test_dimer_and_star_weight_formula():
    for name in ("dimer", "star"):
        dist = exact_distribution(named_patch(name))
        assert weight_formula_residual(dist) < 1e-9


def test_weight_probability_ratio_on_dimer():
    lat = named_patch("dimer")
    dist = exact_distribution(lat)
    same = dist.prob([2, 2])
    diff = dist.prob([0, 2])
    w_same = log2_weight(label_domains(lat, np.array([2, 2], dtype=np.int8)))
    w_diff = log2_weight(label_domains(lat, np.array([0, 2], dtype=np.int8)))
    assert same / diff == pytest.approx(math.ldexp(1.0, w_same - w_diff), rel=1e-10)


def test_weight_formula_detects_mismatch():
    # periodic-chain probabilities scored against open-chain weights must fail
    dist = exact_distribution(build_lattice("chain1d", 4, "periodic"))
    wrong = dataclasses.replace(dist, lattice=build_lattice("chain1d", 4, "open"))
    assert weight_formula_residual(wrong) > 1e-3


def test_budget_guard():
    with pytest.raises(QubitBudgetError):
        exact_distribution(build_lattice("honeycomb", 8, "periodic"))
