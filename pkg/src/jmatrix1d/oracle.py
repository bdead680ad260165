"""Independent reference solver: piecewise-constant transfer matrices.

The Schrödinger equation is integrated for ``(psi, psi')`` from
``-X`` to ``+X`` with the potential replaced by its midpoint value on
each cell. Cells are aligned to the potential's breakpoints, so steps
and kinks fall on cell edges. The reflection and transmission amplitudes
follow from matching ``exp(ikx) + R exp(-ikx)`` on the left and
``T exp(ikx)`` on the right.

The midpoint scheme is symmetric, so its error expands in even powers of
the step; results from steps ``h`` and ``h/2`` are combined by Richardson
extrapolation, and the same is repeated at ``h/2`` and ``h/4`` to estimate
the remaining grid error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, ResolutionError

__all__ = ["OracleResult", "solve_rt", "build_grid", "match_amplitudes", "ORACLE_TOL"]

ORACLE_TOL = 1e-9
GRID_TOL = 1e-8
# per-cell phase limit k*h and cells per breakpoint interval
PHASE_PER_CELL = 0.02
MIN_CELLS = 20


@dataclass(frozen=True)
class OracleResult:
    """Amplitudes on an energy grid from the transfer-matrix solver.

    ``error`` is the change in ``|T|^2`` between the extrapolated result
    and the finer raw grid; ``cells`` is the cell count of that grid.
    """

    energies: np.ndarray
    T: np.ndarray
    R: np.ndarray
    h: float
    cells: int
    extent: float
    error: np.ndarray

    @property
    def transmission(self):
        return np.abs(self.T) ** 2

    @property
    def reflection(self):
        return np.abs(self.R) ** 2

    @property
    def unitarity_defect(self):
        return self.transmission + self.reflection - 1.0


def build_grid(cutoff, breakpoints, h, refine=1):
    """Cell edges on ``[-cutoff, cutoff]`` aligned to ``breakpoints``, step at most ``h``.

    ``refine`` multiplies the cell count of every interval, so grids for
    ``refine=1`` and ``refine=2`` are exactly nested.
    """
    pts = {-cutoff, cutoff}
    pts.update(b for b in breakpoints if -cutoff < b < cutoff)
    knots = np.array(sorted(pts))
    edges = [knots[:1]]
    for a, b in zip(knots[:-1], knots[1:]):
        n = refine * max(MIN_CELLS, int(math.ceil((b - a) / h)))
        edges.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(edges)


def match_amplitudes(M, k, x_left, x_right):
    """``(T, R)`` from transfer matrices ``M`` mapping ``(psi, psi')`` left to right."""
    ik = 1j * k
    el = np.exp(ik * x_left)
    u0 = M[:, 0, 0] * el + M[:, 0, 1] * ik * el
    u1 = M[:, 1, 0] * el + M[:, 1, 1] * ik * el
    v0 = M[:, 0, 0] / el - M[:, 0, 1] * ik / el
    v1 = M[:, 1, 0] / el - M[:, 1, 1] * ik / el
    # components along exp(+ikx) and exp(-ikx) at the right edge
    er = np.exp(ik * x_right)
    fwd_u = 0.5 * (u0 + u1 / ik) / er
    bwd_u = 0.5 * (u0 - u1 / ik) * er
    fwd_v = 0.5 * (v0 + v1 / ik) / er
    bwd_v = 0.5 * (v0 - v1 / ik) * er
    R = -bwd_u / bwd_v
    T = fwd_u + R * fwd_v
    return T, R


def _raw(potential, energies, edges):
    mids = 0.5 * (edges[1:] + edges[:-1])
    widths = np.diff(edges)
    v = np.asarray(potential(mids), dtype=float)
    M = _backend.transfer_matrices(np.ascontiguousarray(energies), np.ascontiguousarray(v), np.ascontiguousarray(widths))
    k = np.sqrt(2.0 * energies)
    return match_amplitudes(np.asarray(M), k, edges[0], edges[-1])


def _default_step(potential, energies, cutoff):
    xs = np.linspace(-cutoff, cutoff, 4001)
    vmin = float(np.min(potential(xs)))
    qmax = math.sqrt(2.0 * max(float(np.max(energies)) - vmin, float(np.max(energies)), 1e-12))
    return PHASE_PER_CELL / qmax


def solve_rt(potential, energies, h=None, cutoff=None, tol=ORACLE_TOL, grid_tol=GRID_TOL):
    """Reflection and transmission amplitudes by transfer matrices.

    Parameters
    ----------
    potential : callable
        ``V(x)``; its ``cutoff`` and ``breakpoints`` attributes are used
        when present.
    energies : float or array
    h : float, optional
        Largest cell width; chosen from the largest local wavenumber when
        omitted.
    cutoff : float, optional
        Half-width of the integration region. Outside it ``V`` is taken as
        zero, where free propagation is exact, so the matching points may
        sit anywhere beyond it.

    Raises
    ------
    ResolutionError
        If the unitarity defect exceeds ``tol``, or halving the step still
        changes |T|^2 by more than ``grid_tol``, after one refinement.
    """
    E = np.atleast_1d(np.asarray(energies, dtype=float))
    if np.any(~(E > 0)):
        raise DomainError("energies must be positive")
    X = cutoff if cutoff is not None else getattr(potential, "cutoff", None)
    if X is None or not math.isfinite(X):
        raise DomainError("the oracle needs a finite cutoff for this potential")
    X = max(float(X), 1e-6)
    breaks = tuple(getattr(potential, "breakpoints", ()))
    step = h if h is not None else _default_step(potential, E, X)

    def extrapolated(hh):
        coarse = _raw(potential, E, build_grid(X, breaks, hh))
        edges = build_grid(X, breaks, hh, refine=2)
        fine = _raw(potential, E, edges)
        return (4.0 * fine[0] - coarse[0]) / 3.0, (4.0 * fine[1] - coarse[1]) / 3.0, edges.size - 1

    T1, R1, _ = extrapolated(step)
    for _attempt in range(2):
        T, R, cells = extrapolated(step / 2)
        err = np.abs(np.abs(T) ** 2 - np.abs(T1) ** 2)
        defect = np.abs(np.abs(T) ** 2 + np.abs(R) ** 2 - 1.0)
        if np.all(defect < tol) and np.all(err < grid_tol):
            return OracleResult(E, T, R, step / 4, cells, X, err)
        step /= 2
        T1 = T
    raise ResolutionError(
        f"transfer-matrix grid unresolved: unitarity defect {defect.max():.2e}, "
        f"grid change {err.max():.2e} at step {step:.2e}"
    )
