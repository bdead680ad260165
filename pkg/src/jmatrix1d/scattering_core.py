"""Finite-matrix scattering: Hamiltonian, Green's function corners, amplitudes.

The total Hamiltonian is represented exactly on the ``2N`` interleaved
functions ``xi_{-N} .. xi_{N-1}`` and by the free tridiagonal operator
beyond them. One eigendecomposition of the ``2N x 2N`` block gives the
resolvent at every energy; only its four corner entries couple to the
outer chains, whose coefficients are carried by the ratio families.

Array row ``i = m + N`` holds ``xi_m``: row ``0`` is ``phi-_{N-1}``,
row ``N - 1`` is ``phi-_0``, row ``N`` is ``phi+_0`` and row ``2N - 1``
is ``phi+_{N-1}``.
"""

from __future__ import annotations

import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateError,
    DomainError,
    NoPlateauError,
    NotUnimodularError,
    PoleError,
)
from .linalg import SpectralDecomposition, eig_symmetric
from .quadrature import PotentialMatrix, default_K, is_even_potential, potential_elements
from .ratios import RatioSet, ratio_stages
from .reference_kinematics import (
    BasisParams,
    EnergyPoint,
    Parity,
    basis_table,
    channel_coefficients,
    partial_sum,
    tridiagonal_operator,
)

__all__ = [
    "FiniteHamiltonian",
    "GreenCorners",
    "ScatteringAmplitudes",
    "SweepResult",
    "PlateauReport",
    "PoleWarning",
    "JMatrixSolver",
    "free_blocks",
    "assemble_hamiltonian",
    "green_corners",
    "green_corners_grid",
    "edge_couplings",
    "amplitudes_general",
    "amplitudes_even",
    "phase_angles",
    "middle_coefficients",
    "wavefunction",
    "plateau_scan",
    "thread_count",
    "POLE_GUARD",
    "UNIMODULAR_TOL",
]

POLE_GUARD = 1e-8
POLE_NUDGE = 10.0
UNIMODULAR_TOL = 1e-6
DEGENERATE_TOL = 1e-14
DEFAULT_EMIN = 1e-4


class PoleWarning(RuntimeWarning):
    """Energies were shifted off an eigenvalue of the finite Hamiltonian."""


def thread_count():
    """Worker threads for energy sweeps, from ``JMX_THREADS`` (default 1)."""
    raw = os.environ.get("JMX_THREADS", "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise DomainError(f"JMX_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise DomainError(f"JMX_THREADS must be a positive integer, got {raw!r}")
    return n


def free_blocks(params, N):
    """Dense ``N x N`` matrices of ``H0`` in the even and odd channels."""
    jp = tridiagonal_operator(Parity.EVEN, N, params, 0.0).dense()
    jm = tridiagonal_operator(Parity.ODD, N, params, 0.0).dense()
    return jp, jm


def edge_couplings(params, N):
    """``(J+, J-)``: the free couplings between channel index ``N - 1`` and ``N``."""
    half = 0.5 * params.lam**2
    return -half * math.sqrt(N * (N - 0.5)), -half * math.sqrt(N * (N + 0.5))


@dataclass(frozen=True)
class FiniteHamiltonian:
    """The ``2N x 2N`` interleaved Hamiltonian and its cached eigendecomposition."""

    params: BasisParams
    N: int
    matrix: np.ndarray
    decomposition: SpectralDecomposition
    potential: PotentialMatrix = field(repr=False)

    @property
    def guard(self):
        """Minimum allowed distance from an eigenvalue."""
        ev = self.decomposition.eigenvalues
        return POLE_GUARD * max(1.0, float(ev[-1] - ev[0]))

    @property
    def odd_coupling(self):
        """Largest entry of the parity-mixing block."""
        return float(np.abs(self.potential.Vpm).max()) if self.N else 0.0

    def green(self, E):
        """Full resolvent ``(H - E)^-1`` by the spectral sum (diagnostics and tests)."""
        lam = self.decomposition.eigenvectors
        return (lam / (self.decomposition.eigenvalues - E)) @ lam.T


def assemble_hamiltonian(params, N, Vmat=None):
    """Build ``H0 + V`` in interleaved order and diagonalize it once."""
    if N < 1:
        raise DomainError("N must be >= 1")
    if Vmat is None:
        Vmat = PotentialMatrix(N, np.zeros((N, N)), np.zeros((N, N)), np.zeros((N, N)))
    if Vmat.N != N:
        raise DomainError(f"potential matrix has N={Vmat.N}, expected {N}")
    jp, jm = free_blocks(params, N)
    rev = np.arange(N)[::-1]
    h = Vmat.interleaved.copy()
    h[:N, :N] += jm[np.ix_(rev, rev)]
    h[N:, N:] += jp
    h = 0.5 * (h + h.T)
    h.setflags(write=False)
    return FiniteHamiltonian(params, N, h, eig_symmetric(h), Vmat)


@dataclass(frozen=True)
class GreenCorners:
    """Corner entries of the resolvent and the edge couplings.

    ``E`` is the energy actually used, which differs from the request
    when it was moved off a pole.
    """

    E: float
    Gpp: float
    Gmm: float
    Gpm: float
    Gmp: float
    Jp: float
    Jm: float
    nudged: bool = False


def _nudge(H, E, allow):
    ev = H.decomposition.eigenvalues
    guard = H.guard
    j = int(np.argmin(np.abs(ev - E)))
    if abs(ev[j] - E) >= guard:
        return E, False
    if not allow:
        raise PoleError(f"energy {E!r} within {guard:.2e} of eigenvalue {ev[j]!r}", energy=E, eigenvalue=ev[j])
    step = POLE_NUDGE * guard
    E_new = E + (step if E >= ev[j] else -step)
    if np.min(np.abs(ev - E_new)) < guard or E_new <= 0:
        E_new = E - (step if E >= ev[j] else -step)
    if np.min(np.abs(ev - E_new)) < guard or E_new <= 0:
        raise PoleError(f"cannot move energy {E!r} off the eigenvalue cluster", energy=E, eigenvalue=ev[j])
    return E_new, True


def green_corners(H, E, nudge=False):
    """Resolvent corners at a single energy.

    Raises
    ------
    PoleError
        If ``E`` is within the guard distance of an eigenvalue and
        ``nudge`` is False (or the shifted energy is also too close).
    """
    E_used, moved = _nudge(H, float(E), nudge)
    if moved:
        warnings.warn(f"energy {E!r} moved to {E_used!r} away from a pole", PoleWarning, stacklevel=2)
    lam = H.decomposition.eigenvectors
    inv = 1.0 / (H.decomposition.eigenvalues - E_used)
    top = lam[2 * H.N - 1]
    bottom = lam[0]
    gpp = float(np.sum(top * top * inv))
    gmm = float(np.sum(bottom * bottom * inv))
    gpm = float(np.sum(top * bottom * inv))
    jp, jm = edge_couplings(H.params, H.N)
    return GreenCorners(E_used, gpp, gmm, gpm, gpm, jp, jm, moved)


def green_corners_grid(H, energies, nudge=True):
    """Vectorized :func:`green_corners`; returns a dict of arrays and the nudge mask."""
    energies = np.asarray(energies, dtype=float)
    used = energies.copy()
    moved = np.zeros(energies.shape, dtype=bool)
    ev = H.decomposition.eigenvalues
    near = np.min(np.abs(ev[None, :] - energies[:, None]), axis=1) < H.guard
    for j in np.flatnonzero(near):
        used[j], moved[j] = _nudge(H, energies[j], nudge)
    lam = H.decomposition.eigenvectors
    inv = 1.0 / (ev[None, :] - used[:, None])
    top = lam[2 * H.N - 1]
    bottom = lam[0]
    jp, jm = edge_couplings(H.params, H.N)
    # row-wise sums rather than matmul so results do not depend on how the grid is chunked
    out = {
        "E": used,
        "Gpp": np.sum(inv * (top * top), axis=1),
        "Gmm": np.sum(inv * (bottom * bottom), axis=1),
        "Gpm": np.sum(inv * (top * bottom), axis=1),
        "Jp": jp,
        "Jm": jm,
    }
    out["Gmp"] = out["Gpm"]
    return out, moved


@dataclass(frozen=True)
class ScatteringAmplitudes:
    """Transmission and reflection amplitudes at one energy.

    ``Wp = T + R`` and ``Wm = T - R``; ``theta_p`` and ``theta_m`` are set
    only when both are unimodular within ``UNIMODULAR_TOL``.
    """

    E: float
    T: complex
    R: complex
    Wp: complex
    Wm: complex
    theta_p: float = math.nan
    theta_m: float = math.nan

    @classmethod
    def from_w(cls, E, Wp, Wm):
        Wp = complex(Wp)
        Wm = complex(Wm)
        tp = tm = math.nan
        if abs(abs(Wp) - 1) <= UNIMODULAR_TOL and abs(abs(Wm) - 1) <= UNIMODULAR_TOL:
            tp, tm = (float(t) for t in _phases(Wp, Wm))
        return cls(float(E), 0.5 * (Wp + Wm), 0.5 * (Wp - Wm), Wp, Wm, tp, tm)

    @property
    def transmission(self):
        return abs(self.T) ** 2

    @property
    def reflection(self):
        return abs(self.R) ** 2

    @property
    def unitarity_defect(self):
        return self.transmission + self.reflection - 1.0


def _half_angle(w):
    a = np.angle(w)
    # a negative real with a signed-zero imaginary part gives -pi; the range is (-pi, pi]
    return 0.5 * np.where(a <= -np.pi, np.pi, a)


def _phases(Wp, Wm):
    return _half_angle(Wp), _half_angle(-Wm)


def phase_angles(amps):
    """``(theta_p, theta_m)`` with ``Wp = exp(2i theta_p)`` and ``Wm = -exp(2i theta_m)``.

    Both angles lie in ``(-pi/2, pi/2]``.
    """
    if abs(abs(amps.Wp) - 1) > UNIMODULAR_TOL or abs(abs(amps.Wm) - 1) > UNIMODULAR_TOL:
        raise NotUnimodularError(
            f"|W+| = {abs(amps.Wp):.9f}, |W-| = {abs(amps.Wm):.9f}; phases need both on the unit circle"
        )
    tp, tm = _phases(amps.Wp, amps.Wm)
    return float(tp), float(tm)


def _corner_terms(corners, prev, cur):
    gpp, gmm, gpm, gmp = corners["Gpp"], corners["Gmm"], corners["Gpm"], corners["Gmp"]
    jp, jm = corners["Jp"], corners["Jm"]
    P = 1.0 + gpp * jp * cur.alpha_p
    Q = 1.0 + gmm * jm * cur.beta_p
    return gpp, gmm, gpm, gmp, jp, jm, P, Q


def _as_dict(corners):
    if isinstance(corners, GreenCorners):
        return {k: getattr(corners, k) for k in ("E", "Gpp", "Gmm", "Gpm", "Gmp", "Jp", "Jm")}
    return corners


def _check(values, what, scalar):
    bad = np.abs(values) < DEGENERATE_TOL
    if scalar and np.any(bad):
        raise DegenerateError(f"vanishing {what} denominator")
    return bad


def _w_general(corners, prev, cur, scalar):
    gpp, gmm, gpm, gmp, jp, jm, P, Q = _corner_terms(corners, prev, cur)
    bad = _check(P, "even-channel", scalar) | _check(Q, "odd-channel", scalar)
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = cur.alpha_p * cur.beta_p * jp * jm * gpm * gmp / (P * Q)
        bad |= _check(1.0 - cross, "coupled", scalar)
        lead = 1.0 / (1.0 - cross)
        right_p = -prev.rho * (1.0 + gpp * jp * cur.alpha_m) + gpm * jm * cur.sigma * cur.alpha_p / cur.gamma_p
        right_m = prev.sigma * (1.0 + gmm * jm * cur.beta_m) - gmp * jp * cur.rho * cur.gamma_p * cur.beta_p
        wp = lead * (right_p / P - gpm * jm * cur.alpha_p / (cur.gamma_p * P) * right_m / Q)
        wm = lead * (right_m / Q - gmp * jp * cur.gamma_p * cur.beta_p / Q * right_p / P)
    return wp, wm, bad


def _w_even(corners, prev, cur, scalar):
    gpp, gmm, _, _, jp, jm, P, Q = _corner_terms(corners, prev, cur)
    bad = _check(P, "even-channel", scalar) | _check(Q, "odd-channel", scalar)
    with np.errstate(divide="ignore", invalid="ignore"):
        wp = -prev.rho * (1.0 + gpp * jp * cur.alpha_m) / P
        wm = prev.sigma * (1.0 + gmm * jm * cur.beta_m) / Q
    return wp, wm, bad


def amplitudes_general(corners, prev, cur, E=None):
    """Amplitudes for a potential of any parity.

    Parameters
    ----------
    corners : GreenCorners
    prev, cur : RatioSet
        Ratio families at stages ``N - 1`` and ``N``.

    Raises
    ------
    DegenerateError
        If a channel or coupled denominator vanishes.
    """
    c = _as_dict(corners)
    wp, wm, _ = _w_general(c, prev, cur, True)
    return ScatteringAmplitudes.from_w(c["E"] if E is None else E, wp, wm)


def amplitudes_even(corners, prev, cur, E=None):
    """Amplitudes when the potential is even; the parity channels decouple.

    Each of ``Wp`` and ``Wm`` is then a ratio of a complex number and its
    conjugate times a unimodular prefactor.
    """
    c = _as_dict(corners)
    wp, wm, _ = _w_even(c, prev, cur, True)
    return ScatteringAmplitudes.from_w(c["E"] if E is None else E, wp, wm)


def _tails(params, energy, N):
    even = channel_coefficients(Parity.EVEN, params, energy, N)
    odd = channel_coefficients(Parity.ODD, params, energy, N)
    return even, odd


def middle_coefficients(H, amps):
    """Interior coefficients ``a_m`` (``m = -N .. N-1``) and the boundary values.

    Returns
    -------
    a : ndarray of complex, shape (2N,)
        In interleaved row order.
    boundary : dict
        ``b_plus``/``b_minus`` at channel indices ``N - 1`` and ``N``
        computed from the outer chains.
    """
    N = H.N
    params = H.params
    energy = EnergyPoint.from_energy(amps.E, params)
    even, odd = _tails(params, energy, N)
    b_plus = amps.Wp * even.f("+") + even.f("-")
    b_minus = amps.Wm * odd.g("+") - odd.g("-")
    jp, jm = edge_couplings(params, N)
    rhs = np.zeros(2 * N, dtype=complex)
    rhs[0] = -jm * b_minus[N]
    rhs[-1] = -jp * b_plus[N]
    _nudge(H, amps.E, False)
    a = H.green(amps.E) @ rhs
    boundary = {
        "b_plus_N": b_plus[N],
        "b_minus_N": b_minus[N],
        "b_plus_Nm1": b_plus[N - 1],
        "b_minus_Nm1": b_minus[N - 1],
    }
    return a, boundary


def wavefunction(H, amps, x, tol=1e-8):
    """``psi(x)`` normalized to an incident ``exp(ikx)`` from the left.

    The interior expansion uses :func:`middle_coefficients`; the outer
    chains are summed with the tapered partial sums of the free problem.
    """
    N = H.N
    params = H.params
    energy = EnergyPoint.from_energy(amps.E, params)
    a, _ = middle_coefficients(H, amps)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    phi_p = basis_table(Parity.EVEN, N - 1, x, params)
    phi_m = basis_table(Parity.ODD, N - 1, x, params)
    inner = a[N:] @ phi_p + a[:N][::-1] @ phi_m
    A, B = params.A, params.B
    wp, wm = amps.Wp, amps.Wm

    def tail(par, kind):
        return partial_sum(par, kind, N, x, params=params, energy=energy, tol=tol)

    outer_p = (wp + 1) / (2 * A) * tail("+", "sine") + 1j * (wp - 1) / (2 * A) * tail("+", "cosine")
    outer_m = (wm - 1) / (2 * B) * tail("-", "cosine") + 1j * (wm + 1) / (2 * B) * tail("-", "sine")
    return inner + outer_p + outer_m


@dataclass
class SweepResult:
    """Amplitudes over an energy grid (arrays aligned with ``energies``)."""

    energies: np.ndarray
    energies_used: np.ndarray
    T: np.ndarray
    R: np.ndarray
    Wp: np.ndarray
    Wm: np.ndarray
    ok: np.ndarray
    nudged: np.ndarray
    method: str

    @property
    def transmission(self):
        return np.abs(self.T) ** 2

    @property
    def reflection(self):
        return np.abs(self.R) ** 2

    @property
    def unitarity_defect(self):
        return self.transmission + self.reflection - 1.0

    @property
    def theta(self):
        """``(theta_p, theta_m)`` arrays; NaN where ``W`` is not unimodular."""
        unimod = (np.abs(np.abs(self.Wp) - 1) <= UNIMODULAR_TOL) & (np.abs(np.abs(self.Wm) - 1) <= UNIMODULAR_TOL)
        tp, tm = _phases(self.Wp, self.Wm)
        return np.where(unimod, tp, np.nan), np.where(unimod, tm, np.nan)

    def point(self, j):
        return ScatteringAmplitudes.from_w(self.energies_used[j], self.Wp[j], self.Wm[j])


class JMatrixSolver:
    """Scattering solver for one potential at fixed ``N`` and ``lam``.

    Construction builds the potential matrix and diagonalizes the finite
    Hamiltonian once; every energy afterwards costs O(N) for the
    resolvent corners plus O(N) for the ratio chains.

    Parameters
    ----------
    potential : callable
        Vectorized ``V(x)``.
    N : int
        Functions kept per parity channel.
    lam : float
        Basis scale.
    K : int, optional
        Quadrature size; defaults to :func:`quadrature.default_K`.
    """

    def __init__(self, potential, N=50, lam=1.0, K=None, A=1.0, B=1.0):
        if N < 2:
            raise DomainError("N must be >= 2")
        self.potential = potential
        self.N = int(N)
        self.params = BasisParams(lam, A, B)
        self.K = default_K(self.N) if K is None else int(K)
        self.potential_matrix = potential_elements(potential, self.N, self.K, lam)
        self.hamiltonian = assemble_hamiltonian(self.params, self.N, self.potential_matrix)
        self.is_even = is_even_potential(potential, self.N, self.K, lam)

    def _resolve_method(self, method):
        if method == "auto":
            return "even" if self.is_even else "general"
        if method not in ("even", "general"):
            raise DomainError(f"unknown method {method!r}")
        return method

    def _chunk(self, energies, method):
        corners, moved = green_corners_grid(self.hamiltonian, energies, nudge=True)
        mus = np.sqrt(2.0 * corners["E"]) / self.params.lam
        prev, cur, ok = ratio_stages(self.N, mus, self.params)
        fn = _w_even if method == "even" else _w_general
        wp, wm, bad = fn(corners, prev, cur, False)
        ok = ok & ~bad & np.isfinite(wp) & np.isfinite(wm)
        return corners["E"], wp, wm, ok, moved

    def sweep(self, energies, method="auto", threads=None):
        """Amplitudes on an energy grid.

        Energies near an eigenvalue are shifted (``nudged``) and a
        :class:`PoleWarning` is issued; energies whose ratio chains fail
        get ``ok = False`` and NaN amplitudes. Output order always
        follows the input order.
        """
        energies = np.atleast_1d(np.asarray(energies, dtype=float))
        if np.any(~(energies > 0)):
            raise DomainError("energies must be positive")
        method = self._resolve_method(method)
        threads = thread_count() if threads is None else max(1, int(threads))
        chunks = np.array_split(np.arange(energies.size), min(threads, max(1, energies.size)))
        if threads > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(pool.map(lambda idx: self._chunk(energies[idx], method), chunks))
        else:
            parts = [self._chunk(energies[idx], method) for idx in chunks]
        used, wp, wm, ok, moved = (np.concatenate([p[i] for p in parts]) for i in range(5))
        if moved.any():
            warnings.warn(f"{int(moved.sum())} energies moved off poles", PoleWarning, stacklevel=2)
        return SweepResult(energies, used, 0.5 * (wp + wm), 0.5 * (wp - wm), wp, wm, ok, moved, method)

    def amplitudes(self, E, method="auto"):
        """:class:`ScatteringAmplitudes` at a single energy (raises on failure)."""
        method = self._resolve_method(method)
        corners = green_corners(self.hamiltonian, E)
        mu = math.sqrt(2.0 * corners.E) / self.params.lam
        prev, cur, ok = ratio_stages(self.N, [mu], self.params)
        if not ok[0]:
            raise DegenerateError(f"ratio chain failed at E={E!r}")
        p = RatioSet(prev.n, *(v[0] for v in prev.as_tuple()))
        c = RatioSet(cur.n, *(v[0] for v in cur.as_tuple()))
        fn = amplitudes_even if method == "even" else amplitudes_general
        return fn(corners, p, c)


@dataclass
class PlateauReport:
    """|T|^2 on an (N, lam) grid and the widest stable lam interval per N."""

    E: float
    N_list: list
    lambda_list: list
    table: np.ndarray
    tol: float
    intervals: dict
    recommended: tuple | None

    def width(self, N):
        lo, hi = self.intervals[N]
        return hi - lo

    def as_dict(self):
        return {
            "E": self.E,
            "N": list(self.N_list),
            "lambda": list(self.lambda_list),
            "transmission": self.table.tolist(),
            "tol": self.tol,
            "intervals": {str(k): list(v) for k, v in self.intervals.items()},
            "recommended": None if self.recommended is None else list(self.recommended),
        }


def _widest_interval(lams, values, tol):
    best = (lams[0], lams[0])
    n = len(lams)
    for i in range(n):
        if not np.isfinite(values[i]):
            continue
        lo = hi = values[i]
        for j in range(i + 1, n):
            v = values[j]
            if not np.isfinite(v):
                break
            lo, hi = min(lo, v), max(hi, v)
            if hi - lo >= tol:
                break
            if lams[j] - lams[i] > best[1] - best[0]:
                best = (lams[i], lams[j])
    return best


def plateau_scan(potential, E_probe, N_list, lambda_list, tol=1e-4, K=None, method="auto"):
    """Tabulate |T|^2 at ``E_probe`` over ``N_list x lambda_list``.

    For each ``N`` the widest contiguous ``lam`` interval whose |T|^2
    spread stays below ``tol`` is reported; the recommendation is the
    centre of that interval at the largest ``N``.

    Raises
    ------
    NoPlateauError
        When no ``N`` has an interval spanning two or more grid points;
        the partial report is attached.
    """
    N_list = sorted(int(n) for n in N_list)
    lambda_list = sorted(float(v) for v in lambda_list)
    if not N_list or not lambda_list:
        raise DomainError("plateau scan needs nonempty N and lambda grids")
    table = np.full((len(N_list), len(lambda_list)), np.nan)
    for i, N in enumerate(N_list):
        for j, lam in enumerate(lambda_list):
            solver = JMatrixSolver(potential, N, lam, K)
            res = solver.sweep([E_probe], method=method, threads=1)
            if res.ok[0]:
                table[i, j] = res.transmission[0]
    intervals = {N: _widest_interval(lambda_list, table[i], tol) for i, N in enumerate(N_list)}
    recommended = None
    for N in reversed(N_list):
        lo, hi = intervals[N]
        if hi > lo:
            centre = 0.5 * (lo + hi)
            recommended = (N, min(lambda_list, key=lambda v: abs(v - centre)))
            break
    report = PlateauReport(float(E_probe), N_list, lambda_list, table, tol, intervals, recommended)
    if recommended is None:
        raise NoPlateauError(f"no lambda interval with |T|^2 spread below {tol:g}", report=report)
    return report
