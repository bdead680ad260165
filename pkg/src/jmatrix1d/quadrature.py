"""Gauss quadrature in the Hermite basis and the potential matrix.

Nodes ``omega_k`` are the eigenvalues of the ``K x K`` Jacobi matrix ``Q``
of the normalized Hermite recursion (zero diagonal, off-diagonal
``sqrt(n/2)``); the eigenvector matrix ``Omega`` carries the weights
implicitly, so a matrix element of a local potential is

    V_ab ~= sum_k Omega[a, k] Omega[b, k] V(omega_k / lam)

with ``a, b`` indices of ``chi_j = exp(-y^2/2) Hhat_j(y)``: even ``j = 2n``
is ``phi+_n`` and odd ``j = 2n + 1`` is ``phi-_n``.

The interleaved ordering used by the finite Hamiltonian places the odd
channel, reversed, before the even one: row ``i = m + N`` holds
``phi+_m`` for ``m >= 0`` and ``phi-_{-m-1}`` for ``m < 0``.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PotentialEvalError
from .linalg import eig_symmetric_tridiagonal
from .reference_kinematics import Parity

__all__ = [
    "QuadratureRule",
    "PotentialMatrix",
    "gauss_hermite_rule",
    "potential_elements",
    "sample_potential",
    "is_even_potential",
    "xi_map",
    "xi_index",
    "default_K",
]

PARITY_TOL = 1e-12


def default_K(N):
    """Default quadrature size for half-size ``N``."""
    return max(2 * N + 50, 4 * N)


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and orthonormal eigenvectors of the Hermite Jacobi matrix.

    ``vectors[n, k]`` is ``Omega_{nk}``; row 0 is positive.
    """

    K: int
    nodes: np.ndarray
    vectors: np.ndarray

    @property
    def weights(self):
        """Gauss weights for the normalized measure ``exp(-y^2)/sqrt(pi) dy``."""
        return self.vectors[0] ** 2


@functools.lru_cache(maxsize=16)
def gauss_hermite_rule(K):
    """K-point rule from the eigendecomposition of ``Q`` (cached per ``K``)."""
    if K < 1:
        raise DomainError("K must be >= 1")
    off = np.sqrt(np.arange(1, K) / 2.0)
    dec = eig_symmetric_tridiagonal(np.zeros(K), off)
    vec = np.array(dec.eigenvectors)
    vec *= np.where(vec[0] < 0, -1.0, 1.0)
    nodes = np.array(dec.eigenvalues)
    nodes.setflags(write=False)
    vec.setflags(write=False)
    return QuadratureRule(K, nodes, vec)


def xi_map(m, N):
    """Map the signed interleaved index ``m`` to ``(parity, n)``."""
    if not -N <= m <= N - 1:
        raise IndexError(f"interleaved index {m} outside [-{N}, {N - 1}]")
    if m >= 0:
        return Parity.EVEN, m
    return Parity.ODD, -m - 1


def xi_index(parity, n, N):
    """Inverse of :func:`xi_map`: the signed index of ``(parity, n)``."""
    if not 0 <= n < N:
        raise IndexError(f"channel index {n} outside [0, {N - 1}]")
    return n if Parity.coerce(parity) is Parity.EVEN else -n - 1


@dataclass(frozen=True)
class PotentialMatrix:
    """Parity blocks of a potential in the truncated basis.

    ``Vpp = <phi+|V_even|phi+>``, ``Vmm = <phi-|V_even|phi->`` and
    ``Vpm = <phi+|V_odd|phi->``; ``Vmp`` is its transpose.
    """

    N: int
    Vpp: np.ndarray
    Vmm: np.ndarray
    Vpm: np.ndarray

    @property
    def Vmp(self):
        return self.Vpm.T

    @property
    def interleaved(self):
        """The symmetric ``2N x 2N`` matrix in interleaved order."""
        N = self.N
        rev = np.arange(N)[::-1]
        out = np.empty((2 * N, 2 * N))
        out[:N, :N] = self.Vmm[np.ix_(rev, rev)]
        out[N:, N:] = self.Vpp
        out[N:, :N] = self.Vpm[:, rev]
        out[:N, N:] = out[N:, :N].T
        return out


def sample_potential(V, x):
    """Evaluate ``V`` on the array ``x``; non-finite output raises :class:`PotentialEvalError`."""
    x = np.asarray(x, dtype=float)
    try:
        with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
            vals = np.asarray(V(x), dtype=float)
    except PotentialEvalError:
        raise
    except Exception:
        vals = np.empty_like(x)
        for i, xi in enumerate(x.flat):
            try:
                with np.errstate(divide="raise", invalid="raise", over="raise", under="ignore"):
                    vals.flat[i] = float(V(np.float64(xi)))
            except Exception as exc:
                raise PotentialEvalError(f"potential failed at x={xi!r}: {exc}", node=float(xi)) from exc
    if vals.shape != x.shape:
        vals = np.broadcast_to(vals, x.shape).astype(float)
    bad = ~np.isfinite(vals)
    if bad.any():
        xi = float(x[bad][0])
        raise PotentialEvalError(f"potential is not finite at x={xi!r}", node=xi)
    return vals


def potential_elements(V, N, K=None, lam=1.0):
    """Quadrature matrix elements of ``V`` between the first ``N`` functions of each channel.

    The potential is split into even and odd parts at ``+-omega_k/lam``
    before sampling.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    K = default_K(N) if K is None else int(K)
    if K <= 2 * N:
        raise DomainError(f"K must exceed 2N = {2 * N}, got {K}")
    if not lam > 0:
        raise DomainError("lam must be positive")
    rule = gauss_hermite_rule(K)
    x = rule.nodes / lam
    vp = sample_potential(V, x)
    vm = sample_potential(V, -x)
    v_even = 0.5 * (vp + vm)
    v_odd = 0.5 * (vp - vm)
    ev = rule.vectors[0 : 2 * N : 2]
    od = rule.vectors[1 : 2 * N : 2]
    Vpp = (ev * v_even) @ ev.T
    Vmm = (od * v_even) @ od.T
    Vpm = (ev * v_odd) @ od.T
    Vpp = 0.5 * (Vpp + Vpp.T)
    Vmm = 0.5 * (Vmm + Vmm.T)
    return PotentialMatrix(N, Vpp, Vmm, Vpm)


def is_even_potential(V, N=50, K=None, lam=1.0):
    """True when ``V`` is even on the quadrature nodes to relative ``1e-12``."""
    K = default_K(N) if K is None else int(K)
    x = gauss_hermite_rule(K).nodes / lam
    vp = sample_potential(V, x)
    vm = sample_potential(V, -x)
    scale = max(1.0, float(np.abs(vp).max()))
    return bool(np.abs(vp - vm).max() < PARITY_TOL * scale)

