import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import hyp1f1

from jmatrix1d.errors import ConvergenceError, DomainError
from jmatrix1d.quadrature import gauss_hermite_rule
from jmatrix1d.reference_kinematics import (
    BasisParams,
    EnergyPoint,
    Parity,
    asymptotic_combination,
    basis_function,
    basis_table,
    channel_coefficients,
    combination,
    cosine_second,
    cosine_seed,
    cosine_source,
    coupling,
    energy_ode_residual,
    j_element,
    partial_sum,
    sine_coefficient_analytic,
    sine_first,
    sine_recursion_step,
    sine_seed,
    summation_window,
    tridiagonal_operator,
)

PI4 = math.pi**0.25
parities = st.sampled_from([Parity.EVEN, Parity.ODD])
mus = st.floats(0.1, 5.0)
lams = st.floats(0.3, 3.0)


def point(mu, lam=1.0, A=1.0, B=1.0):
    p = BasisParams(lam, A, B)
    return p, EnergyPoint.from_mu(mu, p)


def test_params_and_energy_validation():
    with pytest.raises(DomainError):
        BasisParams(0.0)
    with pytest.raises(DomainError):
        EnergyPoint.from_energy(-1.0, BasisParams())
    p = BasisParams(2.0)
    e = EnergyPoint.from_energy(2.0, p)
    assert e.k == pytest.approx(2.0)
    assert e.mu == pytest.approx(1.0)
    assert Parity.coerce("-") is Parity.ODD
    assert Parity.coerce("even") is Parity.EVEN


def test_j_element_examples():
    p = BasisParams(1.0)
    assert j_element(Parity.EVEN, 0, 0, p, 0.0) == pytest.approx(0.25)
    assert j_element(Parity.EVEN, 0, 2, p, 1.3) == 0.0
    assert j_element(Parity.ODD, 1, 0, p, 0.0) == pytest.approx(-0.5 * math.sqrt(1.5))
    with pytest.raises(DomainError):
        j_element(Parity.EVEN, -1, 0, p)


@given(parity=parities, n=st.integers(0, 40), m=st.integers(0, 40), lam=lams, E=st.floats(0, 10))
def test_j_element_symmetric_and_tridiagonal(parity, n, m, lam, E):
    p = BasisParams(lam)
    v = j_element(parity, n, m, p, E)
    assert v == j_element(parity, m, n, p, E)
    if abs(n - m) >= 2:
        assert v == 0.0


@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_free_operator_matches_numerical_kinetic_matrix(parity):
    # kinetic matrix from second differences of the basis functions
    p = BasisParams(1.3)
    x = np.linspace(-12, 12, 24001)
    h = x[1] - x[0]
    phi = basis_table(parity, 6, x, p)
    d2 = np.gradient(np.gradient(phi, h, axis=1), h, axis=1)
    kin = -0.5 * (phi @ d2.T) * h
    op = tridiagonal_operator(parity, 7, p, 0.0).dense()
    assert np.abs(kin - op).max() < 2e-5 * np.abs(op).max()


@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
def test_basis_orthonormal_and_parity(parity):
    p = BasisParams(0.8)
    x = np.linspace(-15, 15, 30001)
    phi = basis_table(parity, 20, x, p)
    gram = phi @ phi.T * (x[1] - x[0])
    assert np.abs(gram - np.eye(21)).max() < 1e-10
    mirrored = basis_table(parity, 20, -x, p)
    assert np.allclose(mirrored, parity.sign * phi, atol=1e-14)
    if parity is Parity.ODD:
        assert basis_function(parity, 7, 0.0, p) == 0.0


def test_basis_normalized_by_quadrature():
    rule = gauss_hermite_rule(12)
    p = BasisParams(1.0)
    # phi_0^2 = exp(-y^2)/sqrt(pi)
    vals = np.array([basis_function(Parity.EVEN, 0, y, p) for y in rule.nodes])
    integral = np.sum(rule.weights * vals**2 * math.sqrt(math.pi) * np.exp(rule.nodes**2))
    assert integral == pytest.approx(1.0, rel=1e-13)


def test_basis_table_stays_finite_far_out():
    vals = basis_table(Parity.ODD, 300, np.array([60.0]), BasisParams(1.0))
    assert np.all(np.isfinite(vals))


def test_sine_seed_examples():
    p = BasisParams(1.0)
    small = EnergyPoint.from_mu(1e-12, p)
    assert sine_seed(Parity.EVEN, p, small) == pytest.approx(math.sqrt(2) * PI4)
    assert sine_seed(Parity.ODD, p, small) == pytest.approx(0.0, abs=1e-10)
    one = EnergyPoint.from_mu(1.0, p)
    assert sine_seed(Parity.EVEN, p, one) == pytest.approx(math.sqrt(2) * PI4 * math.exp(-0.5))


def test_cosine_seed_examples():
    p = BasisParams(1.0)
    small = EnergyPoint.from_mu(1e-12, p)
    assert cosine_seed(Parity.EVEN, p, small) == pytest.approx(0.0, abs=1e-10)
    assert cosine_seed(Parity.ODD, p, small) == pytest.approx(2.0 / PI4)
    one = EnergyPoint.from_mu(1.0, p)
    expect = 2 * math.sqrt(2) / PI4 * math.exp(-0.5) * hyp1f1(0.5, 1.5, 1.0)
    assert cosine_seed(Parity.EVEN, p, one) == pytest.approx(expect, rel=1e-14)
    assert cosine_source(Parity.ODD, p, small) == pytest.approx(0.5 / PI4)
    assert math.isfinite(cosine_second(Parity.ODD, p, small, cosine_seed(Parity.ODD, p, small)))


@given(parity=parities, mu=mus, lam=lams)
def test_sine_seed_matches_analytic_n0(parity, mu, lam):
    p, e = point(mu, lam, 1.7, 0.6)
    assert sine_coefficient_analytic(parity, 0, p, e) == pytest.approx(sine_seed(parity, p, e), rel=1e-13)


def test_odd_first_step_has_minus_sign():
    # s1 of the odd chain from the analytic Hermite form fixes the sign
    p, e = point(0.9)
    s0 = sine_coefficient_analytic(Parity.ODD, 0, p, e)
    s1 = sine_coefficient_analytic(Parity.ODD, 1, p, e)
    assert sine_first(Parity.ODD, s0, e.mu) == pytest.approx(s1, rel=1e-13)
    assert e.mu2 * s0 == pytest.approx(1.5 * s0 - math.sqrt(1.5) * s1, rel=1e-13)


def test_sine_at_zero_energy_alternates():
    p, e = point(1e-9)
    s = [sine_coefficient_analytic(Parity.EVEN, n, p, e) for n in range(8)]
    assert all(v > 0 for v in s)  # (-1)^n H_2n(0) carries the same (-1)^n
    s5 = sine_coefficient_analytic(Parity.EVEN, 5, *point(1.3))
    chain = channel_coefficients(Parity.EVEN, *point(1.3), 5, sine="recursion")
    assert chain.s[5] == pytest.approx(s5, rel=1e-12)


@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
@pytest.mark.parametrize("mu", [0.1, 0.5, 1.0, 2.0, 5.0])
def test_recursion_matches_analytic(parity, mu):
    p, e = point(mu)
    a = channel_coefficients(parity, p, e, 50, sine="analytic").s
    r = channel_coefficients(parity, p, e, 50, sine="recursion").s
    scale = np.abs(a).max()
    assert np.abs(a - r).max() <= 1e-9 * scale


def test_recursion_step_defining_relation():
    p, e = point(1.1)
    s = channel_coefficients(Parity.EVEN, p, e, 3).s
    nxt = sine_recursion_step(Parity.EVEN, 1, s[1], s[0], e.mu)
    row = (2 + 0.5 - e.mu2) * s[1] - coupling(Parity.EVEN, 1) * s[0] - coupling(Parity.EVEN, 2) * nxt
    assert abs(row) < 1e-14
    with pytest.raises(DomainError):
        sine_recursion_step(Parity.EVEN, 0, 1.0, 1.0, 1.0)


@given(parity=parities, mu=mus, lam=lams)
def test_chains_solve_the_operator(parity, mu, lam):
    p, e = point(mu, lam)
    ch = channel_coefficients(parity, p, e, 40)
    op = tridiagonal_operator(parity, 41, p, e).dense()
    rs = (op @ ch.s)[:-1]
    rc = (op @ ch.c)[:-1]
    scale_s = np.abs(op).max() * np.abs(ch.s).max()
    scale_c = np.abs(op).max() * np.abs(ch.c).max()
    assert np.abs(rs).max() <= 1e-10 * scale_s
    assert np.abs(rc[1:]).max() <= 1e-10 * scale_c
    # row 0 of the cosine chain carries the source
    assert rc[0] == pytest.approx(cosine_source(parity, p, e), rel=1e-10)


@given(parity=parities, mu=mus, lam=lams)
def test_scaled_wronskian_constant(parity, mu, lam):
    p, e = point(mu, lam, 1.3, 0.7)
    ch = channel_coefficients(parity, p, e, 50)
    w = ch.scaled_wronskian()
    ref = ch.expected_scaled_wronskian()
    assert ref != 0
    assert np.abs(w - ref).max() <= 1e-9 * abs(ref)


@pytest.mark.parametrize("parity", [Parity.EVEN, Parity.ODD])
@pytest.mark.parametrize("kind", ["sine", "cosine"])
@pytest.mark.parametrize("n,mu", [(3, 1.0), (2, 0.7), (6, 1.8)])
def test_energy_ode_residual_bound(parity, kind, n, mu):
    p = BasisParams(1.0)

    def coeff(m):
        ch = channel_coefficients(parity, p, EnergyPoint.from_mu(m, p), max(n, 1))
        return (ch.s if kind == "sine" else ch.c)[n]

    h = 1e-4
    val = coeff(mu)
    res = energy_ode_residual(parity, n, coeff, mu, h)
    assert abs(res) <= 1e-5 * abs(val) * max(1.0, mu * mu)


def test_energy_ode_residual_of_constant():
    res = energy_ode_residual(Parity.ODD, 2, lambda m: 3.0, 0.4, 1e-3)
    assert res == pytest.approx((-0.16 + 10 + 1) * 3.0, rel=1e-14)


def test_f_and_g_sign_conventions():
    p, e = point(1.2, 1.0, 1.5, 0.5)
    ev = channel_coefficients(Parity.EVEN, p, e, 4)
    od = channel_coefficients(Parity.ODD, p, e, 4)
    assert ev.f("+")[0].imag * 2 * p.A == pytest.approx(ev.c[0])
    assert ev.f("-")[0].imag * 2 * p.A == pytest.approx(-ev.c[0])
    assert od.g("+")[0].imag * 2 * p.B == pytest.approx(od.s[0])
    with pytest.raises(DomainError):
        ev.g("+")


def test_summation_window_shape():
    w = summation_window(np.arange(101), 100)
    assert np.all(w[:51] == 1.0)
    assert w[100] == pytest.approx(0.0, abs=1e-15)
    assert np.all(np.diff(w) <= 1e-15)


def test_full_sums_reproduce_plane_waves():
    p = BasisParams(1.0, 1.0, 1.0)
    e = EnergyPoint.from_energy(0.8, p)
    x = np.linspace(-6, 6, 61)
    k = e.k
    assert np.allclose(partial_sum(Parity.EVEN, "sine", 0, x, params=p, energy=e), np.cos(k * x), atol=1e-9)
    assert np.allclose(partial_sum(Parity.ODD, "sine", 0, x, params=p, energy=e), np.sin(k * x), atol=1e-9)
    assert partial_sum(Parity.ODD, "cosine", 0, 0.0, params=p, energy=e) == 0.0


def test_cosine_sums_tend_to_signed_waves():
    p = BasisParams(1.0)
    e = EnergyPoint.from_energy(0.5, p)
    x = np.array([-14.0, -11.5, 11.5, 14.0])
    cm = partial_sum(Parity.ODD, "cosine", 0, x, params=p, energy=e, tol=1e-8)
    cp = partial_sum(Parity.EVEN, "cosine", 0, x, params=p, energy=e, tol=1e-8)
    assert np.allclose(cm, np.sign(x) * np.cos(e.k * x), atol=1e-3)
    assert np.allclose(cp, np.sign(x) * np.sin(e.k * x), atol=1e-3)


def test_partial_sum_raises_when_order_capped():
    p = BasisParams(1.0)
    e = EnergyPoint.from_energy(0.5, p)
    with pytest.raises(ConvergenceError):
        partial_sum(Parity.EVEN, "sine", 0, np.array([4.0]), params=p, energy=e, tol=1e-14, n_max=10)
    with pytest.raises(DomainError):
        partial_sum(Parity.EVEN, "tangent", 0, 0.0, params=p, energy=e)


def test_confined_combination_one_sided():
    p = BasisParams(1.0)
    e = EnergyPoint.from_energy(0.5, p)
    x = np.array([-16.0, -12.0, 12.0, 16.0])
    f = combination("cosine", "+", 10, x, p, e, tol=1e-8)
    assert np.allclose(f[:2], 0.0, atol=5e-3)
    assert np.allclose(f[2:], 2 * np.cos(e.k * x[2:]), atol=5e-3)


def test_asymptotic_combination_outgoing_and_conjugate():
    p = BasisParams(1.0)
    e = EnergyPoint.from_energy(0.5, p)
    x = np.array([-14.0, 14.0])
    out = asymptotic_combination("+", "outgoing", 5, x, p, e, tol=1e-8)
    inc = asymptotic_combination("+", "incoming", 5, x, p, e, tol=1e-8)
    assert abs(out[0]) < 5e-3
    assert abs(out[1] - np.exp(1j * e.k * x[1])) < 5e-3
    assert np.allclose(inc, np.conj(out), atol=1e-14)
