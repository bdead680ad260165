import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmatrix1d.errors import DomainError, PotentialEvalError
from jmatrix1d.potentials import PoschlTeller, SquareBarrier
from jmatrix1d.quadrature import (
    default_K,
    gauss_hermite_rule,
    is_even_potential,
    potential_elements,
    xi_index,
    xi_map,
)
from jmatrix1d.reference_kinematics import BasisParams, Parity, basis_table


def test_small_rules():
    assert gauss_hermite_rule(1).nodes[0] == pytest.approx(0.0, abs=1e-300)
    assert np.allclose(gauss_hermite_rule(2).nodes, [-1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-14)
    with pytest.raises(DomainError):
        gauss_hermite_rule(0)


@pytest.mark.parametrize("K", [5, 64, 151])
def test_rule_structure(K):
    rule = gauss_hermite_rule(K)
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=1e-12)
    assert np.abs(rule.vectors @ rule.vectors.T - np.eye(K)).max() < 1e-12
    assert np.all(rule.vectors[0] > 0)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-13)


def test_moments_of_normalized_weight():
    rule = gauss_hermite_rule(64)
    w, y = rule.weights, rule.nodes
    # moments of exp(-y^2)/sqrt(pi): 1, 1/2, 3/4
    assert np.sum(w) == pytest.approx(1.0, abs=1e-12)
    assert np.sum(w * y**2) == pytest.approx(0.5, abs=1e-12)
    assert np.sum(w * y**4) == pytest.approx(0.75, abs=1e-12)


def test_rule_matches_numpy_hermgauss():
    y, w = np.polynomial.hermite.hermgauss(40)
    rule = gauss_hermite_rule(40)
    assert np.allclose(rule.nodes, y, atol=1e-12)
    assert np.allclose(rule.weights, w / math.sqrt(math.pi), atol=1e-14)


def test_xi_map_examples_and_bijection():
    N = 7
    assert xi_map(0, N) == (Parity.EVEN, 0)
    assert xi_map(-1, N) == (Parity.ODD, 0)
    assert xi_map(-N, N) == (Parity.ODD, N - 1)
    for m in range(-N, N):
        assert xi_index(*xi_map(m, N), N) == m
    with pytest.raises(IndexError):
        xi_map(N, N)
    with pytest.raises(IndexError):
        xi_index(Parity.EVEN, N, N)


def test_zero_and_constant_potential():
    N = 20
    z = potential_elements(lambda x: np.zeros_like(x), N, 64)
    assert not z.interleaved.any()
    c = potential_elements(lambda x: np.full_like(x, 2.5), N, 64)
    assert np.abs(c.interleaved - 2.5 * np.eye(2 * N)).max() < 1e-12


def test_even_potential_has_no_mixing_block():
    m = potential_elements(PoschlTeller(), 15, 80)
    assert not m.Vpm.any()
    assert is_even_potential(PoschlTeller(), 15)
    assert not is_even_potential(SquareBarrier(), 15)


def test_odd_potential_has_only_mixing_block():
    m = potential_elements(lambda x: np.tanh(x), 12, 60)
    assert not m.Vpp.any() and not m.Vmm.any()
    assert np.abs(m.Vpm).max() > 0.1
    assert np.array_equal(m.Vmp, m.Vpm.T)


def test_interleaved_layout():
    N = 6
    m = potential_elements(lambda x: 0.3 * x + np.exp(-x * x), N, 40, lam=0.9)
    full = m.interleaved
    assert np.array_equal(full, full.T)
    # index N + n is phi+_n, index N - 1 - n is phi-_n
    assert full[N + 2, N + 4] == m.Vpp[2, 4]
    assert full[N - 1 - 1, N - 1 - 3] == m.Vmm[1, 3]
    assert full[N + 0, N - 1 - 2] == m.Vpm[0, 2]


@given(lam=st.floats(0.5, 2.0))
def test_smooth_elements_match_direct_integration(lam):
    N = 6
    V = lambda x: np.exp(-0.5 * (x - 0.3) ** 2)
    m = potential_elements(V, N, 80, lam)
    p = BasisParams(lam)
    x = np.linspace(-14 / lam, 14 / lam, 8001)
    h = x[1] - x[0]
    ev = basis_table(Parity.EVEN, N - 1, x, p)
    od = basis_table(Parity.ODD, N - 1, x, p)
    vx = V(x)
    assert np.abs((ev * vx) @ ev.T * h - m.Vpp).max() < 1e-10
    assert np.abs((ev * vx) @ od.T * h - m.Vpm).max() < 1e-10


def test_convergence_in_K_for_smooth_potential():
    N = 10
    V = lambda x: 1.0 / (1.0 + x * x)
    diffs = []
    for K in (30, 60, 120):
        a = potential_elements(V, N, K).interleaved
        b = potential_elements(V, N, 2 * K).interleaved
        diffs.append(np.abs(a - b).max())
    assert diffs[0] > diffs[1] > diffs[2]
    V2 = lambda x: np.exp(-(x * x))
    d = np.abs(potential_elements(V2, N, default_K(N)).interleaved - potential_elements(V2, N, 2 * default_K(N)).interleaved)
    assert d.max() < 1e-10


def test_element_preconditions():
    with pytest.raises(DomainError):
        potential_elements(lambda x: x, 10, 20)
    with pytest.raises(DomainError):
        potential_elements(lambda x: x, 10, 30, lam=0.0)
    assert default_K(10) == 70 and default_K(50) == 200


def test_potential_eval_error_names_node():
    def bad(x):
        x = np.asarray(x)
        return np.where(x > 1.0, np.nan, 0.0)

    with pytest.raises(PotentialEvalError) as info:
        potential_elements(bad, 5, 20)
    assert info.value.node > 1.0

    def scalar_only(x):
        if np.ndim(x):
            raise TypeError("scalar please")
        if x < -2:
            raise ValueError("domain")
        return float(x)

    with pytest.raises(PotentialEvalError) as info:
        potential_elements(scalar_only, 5, 20)
    assert info.value.node < -2
