"""Real symmetric eigendecompositions.

The tridiagonal path runs the package's own implicit-shift QL kernel
(compiled when available). The dense path delegates to LAPACK through
:func:`numpy.linalg.eigh`; both return a :class:`SpectralDecomposition`
sorted by ascending eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ConvergenceError, DomainError

__all__ = [
    "SpectralDecomposition",
    "eig_symmetric",
    "eig_symmetric_tridiagonal",
]

_SYMMETRY_TOL = 1e-12
MAX_ITER = 80


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenpairs of a real symmetric matrix.

    Attributes
    ----------
    eigenvalues : ndarray, shape (n,)
        Ascending.
    eigenvectors : ndarray, shape (n, n)
        Orthonormal; column ``k`` pairs with ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)

    @property
    def order(self):
        return self.eigenvalues.shape[0]

    def residual(self, matrix):
        """Largest ``|M v_k - e_k v_k|`` over all pairs."""
        m = np.asarray(matrix, dtype=float)
        r = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        return float(np.abs(r).max()) if r.size else 0.0

    def orthogonality_defect(self):
        v = self.eigenvectors
        return float(np.abs(v.T @ v - np.eye(self.order)).max()) if v.size else 0.0


def _sorted(w, z):
    order = np.argsort(w, kind="stable")
    return SpectralDecomposition(np.ascontiguousarray(w[order]), np.ascontiguousarray(z[:, order]))


def eig_symmetric(matrix):
    """Full eigendecomposition of a dense real symmetric matrix.

    Raises
    ------
    DomainError
        If the input is not square, not finite, or not symmetric.
    ConvergenceError
        If LAPACK fails to converge.
    """
    m = np.asarray(matrix, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise DomainError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(m).max())) if m.size else 1.0
    if m.size and np.abs(m - m.T).max() > _SYMMETRY_TOL * scale:
        raise DomainError("matrix is not symmetric")
    try:
        w, z = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    return _sorted(w, z)


def eig_symmetric_tridiagonal(diag, offdiag):
    """Eigendecomposition of the symmetric tridiagonal matrix ``(diag, offdiag)``.

    Uses implicit-shift QL iterations with at most 80 sweeps per
    eigenvalue; cost is O(n^2) including eigenvectors.
    """
    d = np.asarray(diag, dtype=float)
    e = np.asarray(offdiag, dtype=float)
    if d.ndim != 1 or e.ndim != 1 or e.shape[0] != max(d.shape[0] - 1, 0):
        raise DomainError("offdiag must have exactly len(diag) - 1 entries")
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
        raise DomainError("tridiagonal entries must be finite")
    w, z, ok = _backend.tql2(d, e, True, MAX_ITER)
    if not ok:
        raise ConvergenceError(f"QL iteration exceeded {MAX_ITER} sweeps for one eigenvalue")
    return _sorted(np.asarray(w, dtype=float), np.asarray(z, dtype=float))
