import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmatrix1d.errors import ConvergenceError, DomainError
from jmatrix1d.linalg import eig_symmetric, eig_symmetric_tridiagonal


def random_symmetric(rng, n):
    a = rng.standard_normal((n, n))
    return 0.5 * (a + a.T)


def test_trivial_examples():
    d = eig_symmetric(np.eye(4))
    assert np.allclose(d.eigenvalues, 1.0)
    assert d.orthogonality_defect() < 1e-14
    d = eig_symmetric(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(d.eigenvalues, [1, 2, 3])
    r = math.sqrt(0.5)
    d = eig_symmetric(np.array([[0.0, r], [r, 0.0]]))
    assert np.allclose(d.eigenvalues, [-r, r], atol=1e-15)


def test_dense_rejects_bad_input():
    with pytest.raises(DomainError):
        eig_symmetric(np.ones((2, 3)))
    with pytest.raises(DomainError):
        eig_symmetric(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(DomainError):
        eig_symmetric(np.array([[np.nan]]))


@given(n=st.integers(1, 40), seed=st.integers(0, 2**32 - 1))
def test_dense_contract(n, seed):
    m = random_symmetric(np.random.default_rng(seed), n)
    d = eig_symmetric(m)
    norm = max(1.0, np.abs(m).max())
    assert d.residual(m) <= 1e-11 * norm * n
    assert d.orthogonality_defect() < 1e-12
    assert np.all(np.diff(d.eigenvalues) >= 0)
    with pytest.raises(ValueError):
        d.eigenvalues[0] = 1.0


@given(n=st.integers(2, 20), seed=st.integers(0, 2**32 - 1))
def test_permutation_similarity_invariance(n, seed):
    rng = np.random.default_rng(seed)
    m = random_symmetric(rng, n)
    perm = rng.permutation(n)
    a = eig_symmetric(m).eigenvalues
    b = eig_symmetric(m[np.ix_(perm, perm)]).eigenvalues
    assert np.allclose(a, b, atol=1e-12)


def test_tridiagonal_small_cases():
    d = eig_symmetric_tridiagonal([0.0, 0.0], [math.sqrt(0.5)])
    assert np.allclose(d.eigenvalues, [-math.sqrt(0.5), math.sqrt(0.5)], atol=1e-15)
    d = eig_symmetric_tridiagonal([2.5], [])
    assert d.eigenvalues[0] == 2.5
    with pytest.raises(DomainError):
        eig_symmetric_tridiagonal([1.0, 2.0], [1.0, 1.0])
    with pytest.raises(DomainError):
        eig_symmetric_tridiagonal([1.0, np.inf], [1.0])


@pytest.mark.parametrize("K", [25, 80])
def test_tridiagonal_agrees_with_dense(K, rng):
    diag = rng.standard_normal(K)
    off = rng.standard_normal(K - 1)
    t = eig_symmetric_tridiagonal(diag, off)
    m = np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)
    dense = eig_symmetric(m)
    assert np.abs(t.eigenvalues - dense.eigenvalues).max() < 1e-11
    assert t.residual(m) < 1e-11 * np.abs(m).max() * K
    assert t.orthogonality_defect() < 1e-12


def test_both_kernels_agree(kernels, rng):
    diag = rng.standard_normal(30)
    off = rng.standard_normal(29)
    w, z, ok = kernels.tql2(diag.copy(), off.copy(), True, 80)
    assert ok
    ref = np.linalg.eigvalsh(np.diag(diag) + np.diag(off, 1) + np.diag(off, -1))
    assert np.abs(np.sort(np.asarray(w)) - ref).max() < 1e-12


def test_kernel_reports_iteration_cap(kernels, rng):
    diag = rng.standard_normal(12)
    off = rng.standard_normal(11) + 1.0
    _, _, ok = kernels.tql2(diag, off, True, 0)
    assert not ok


def test_iteration_cap_raises(monkeypatch, rng):
    from jmatrix1d import linalg

    monkeypatch.setattr(linalg, "MAX_ITER", 0)
    with pytest.raises(ConvergenceError):
        eig_symmetric_tridiagonal(rng.standard_normal(5), np.ones(4))
