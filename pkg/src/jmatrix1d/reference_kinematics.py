"""Analytic solution of the free problem in the oscillator basis.

Conventions: hbar = m = 1, ``k = sqrt(2E)`` and ``mu = k / lam``. The even
channel uses ``phi+_n(x) ~ exp(-y^2/2) Hhat_{2n}(y)`` and the odd channel
``phi-_n(x) ~ exp(-y^2/2) Hhat_{2n+1}(y)`` with ``y = lam x``. In either
channel the free wave operator ``H0 - E`` is tridiagonal with

    diag(n)      = (lam^2/2) (2n + d - mu^2),    d = 1/2 (even), 3/2 (odd)
    coupling(n)  = -(lam^2/2) b(n),              b(n) = sqrt(n (n - 1/2)) (even)
                                                 b(n) = sqrt(n (n + 1/2)) (odd)

where ``coupling(n)`` links rows ``n - 1`` and ``n``. The sine-like
coefficients ``s_n`` solve the homogeneous recursion from ``n = 0``; the
cosine-like ``c_n`` pick up a source term in row 0 only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateError, DomainError
from .special_fn import hermite_normalized, hermite_table, kummer_1f1_half_scaled

__all__ = [
    "Parity",
    "BasisParams",
    "EnergyPoint",
    "ChannelCoefficients",
    "TridiagonalOperator",
    "coupling",
    "j_element",
    "tridiagonal_operator",
    "basis_function",
    "basis_table",
    "sine_seed",
    "sine_first",
    "sine_coefficient_analytic",
    "sine_recursion_step",
    "cosine_seed",
    "cosine_source",
    "cosine_second",
    "channel_coefficients",
    "energy_ode_residual",
    "summation_window",
    "partial_sum",
    "combination",
    "asymptotic_combination",
]

_PI_QUARTER = math.pi**0.25


class Parity(enum.Enum):
    """Parity channel; ``EVEN`` is the ``+`` channel."""

    EVEN = "+"
    ODD = "-"

    @classmethod
    def coerce(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        if key in ("+", "even", "plus", "e"):
            return cls.EVEN
        if key in ("-", "odd", "minus", "o"):
            return cls.ODD
        raise DomainError(f"unknown parity {value!r}")

    @property
    def diagonal_offset(self):
        return 0.5 if self is Parity.EVEN else 1.5

    @property
    def sign(self):
        return 1 if self is Parity.EVEN else -1

    def hermite_degree(self, n):
        return 2 * n if self is Parity.EVEN else 2 * n + 1


@dataclass(frozen=True)
class BasisParams:
    """Basis scale ``lam`` (inverse length) and channel amplitudes ``A``, ``B``."""

    lam: float = 1.0
    A: float = 1.0
    B: float = 1.0

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lam must be positive and finite, got {self.lam!r}")
        if self.A == 0 or self.B == 0:
            raise DomainError("A and B must be nonzero")

    def amplitude(self, parity):
        return self.A if Parity.coerce(parity) is Parity.EVEN else self.B


@dataclass(frozen=True)
class EnergyPoint:
    """A scattering energy with its derived wavenumber and scaled momentum."""

    E: float
    k: float
    mu: float

    @classmethod
    def from_energy(cls, E, params):
        if not (E > 0 and math.isfinite(E)):
            raise DomainError(f"energy must be positive and finite, got {E!r}")
        k = math.sqrt(2.0 * E)
        return cls(float(E), k, k / params.lam)

    @classmethod
    def from_mu(cls, mu, params):
        if not (mu > 0 and math.isfinite(mu)):
            raise DomainError(f"mu must be positive and finite, got {mu!r}")
        k = mu * params.lam
        return cls(0.5 * k * k, k, float(mu))

    @property
    def mu2(self):
        return self.mu * self.mu


def _mu2_of(energy, params):
    if isinstance(energy, EnergyPoint):
        return energy.mu2
    E = float(energy)
    if E < 0:
        raise DomainError("energy must be >= 0")
    return 2.0 * E / params.lam**2


def coupling(parity, n):
    """``b(n)``: the magnitude linking rows ``n - 1`` and ``n`` (zero at n = 0)."""
    if n <= 0:
        return 0.0
    if Parity.coerce(parity) is Parity.EVEN:
        return math.sqrt(n * (n - 0.5))
    return math.sqrt(n * (n + 0.5))


def j_element(parity, n, m, params, energy=0.0):
    """Matrix element ``<phi_n|(H0 - E)|phi_m>`` within one parity channel.

    ``energy`` may be an :class:`EnergyPoint` or a number ``E >= 0``;
    ``E = 0`` gives the matrix of ``H0`` itself.
    """
    if n < 0 or m < 0:
        raise DomainError("basis indices must be >= 0")
    parity = Parity.coerce(parity)
    half = 0.5 * params.lam**2
    if n == m:
        return half * (2 * n + parity.diagonal_offset - _mu2_of(energy, params))
    if abs(n - m) == 1:
        return -half * coupling(parity, max(n, m))
    return 0.0


@dataclass(frozen=True)
class TridiagonalOperator:
    """Leading ``size x size`` block of ``H0 - E`` in one channel."""

    parity: Parity
    diag: np.ndarray
    offdiag: np.ndarray
    energy: float
    lam: float

    def dense(self):
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def tridiagonal_operator(parity, size, params, energy=0.0):
    parity = Parity.coerce(parity)
    if size < 1:
        raise DomainError("size must be >= 1")
    mu2 = _mu2_of(energy, params)
    half = 0.5 * params.lam**2
    n = np.arange(size)
    diag = half * (2 * n + parity.diagonal_offset - mu2)
    offdiag = np.array([-half * coupling(parity, j) for j in range(1, size)])
    E = energy.E if isinstance(energy, EnergyPoint) else float(energy)
    return TridiagonalOperator(parity, diag, offdiag, E, params.lam)


def basis_table(parity, nmax, x, params):
    """``phi_0 .. phi_nmax`` of one channel at ``x``, stacked along axis 0.

    The Gaussian is folded into the recursion seed so values stay
    representable at large ``|x|`` where ``Hhat`` alone would overflow.
    """
    parity = Parity.coerce(parity)
    y = params.lam * np.asarray(x, dtype=float)
    top = parity.hermite_degree(nmax)
    psi = np.empty((top + 1,) + y.shape)
    psi[0] = math.sqrt(params.lam) / _PI_QUARTER * np.exp(-0.5 * y * y)
    if top >= 1:
        psi[1] = math.sqrt(2.0) * y * psi[0]
    for m in range(1, top):
        psi[m + 1] = (y * psi[m] - math.sqrt(m / 2.0) * psi[m - 1]) / math.sqrt((m + 1) / 2.0)
    start = 0 if parity is Parity.EVEN else 1
    return psi[start::2]


def basis_function(parity, n, x, params):
    """Orthonormal basis function ``phi_n`` of the given parity at ``x``."""
    if n < 0:
        raise DomainError("n must be >= 0")
    out = basis_table(parity, n, x, params)[n]
    return float(out) if np.ndim(x) == 0 else out


def sine_seed(parity, params, energy):
    """``s_0`` of the given channel."""
    parity = Parity.coerce(parity)
    mu = energy.mu
    g = math.exp(-0.5 * mu * mu)
    if parity is Parity.EVEN:
        return math.sqrt(2.0 / params.lam) * params.A * _PI_QUARTER * g
    return 2.0 / math.sqrt(params.lam) * _PI_QUARTER * params.B * mu * g


def sine_first(parity, s0, mu):
    """``s_1`` from ``s_0`` via row 0 of the homogeneous recursion."""
    parity = Parity.coerce(parity)
    d = parity.diagonal_offset
    return (d - mu * mu) * s0 / math.sqrt(d)


def sine_coefficient_analytic(parity, n, params, energy):
    """Closed-form ``s_n`` through the normalized Hermite value at ``mu``."""
    parity = Parity.coerce(parity)
    if n < 0:
        raise DomainError("n must be >= 0")
    mu = energy.mu
    amp = params.amplitude(parity)
    h = hermite_normalized(parity.hermite_degree(n), mu)
    sign = -1.0 if n % 2 else 1.0
    return sign * _PI_QUARTER * math.sqrt(2.0 / params.lam) * amp * math.exp(-0.5 * mu * mu) * h


def sine_recursion_step(parity, n, s_n, s_nm1, mu):
    """Return ``s_{n+1}`` from row ``n >= 1`` of the homogeneous recursion.

    The cosine-like chain obeys the same step for ``n >= 1``.
    """
    if n < 1:
        raise DomainError("recursion step needs n >= 1")
    parity = Parity.coerce(parity)
    return ((2 * n + parity.diagonal_offset - mu * mu) * s_n - coupling(parity, n) * s_nm1) / coupling(
        parity, n + 1
    )


def cosine_seed(parity, params, energy):
    """``c_0`` of the given channel (uses the scaled confluent evaluator)."""
    parity = Parity.coerce(parity)
    mu = energy.mu
    if parity is Parity.EVEN:
        f = kummer_1f1_half_scaled("cosine_even", mu * mu)
        return 2.0 * math.sqrt(2.0 / params.lam) / _PI_QUARTER * params.A * mu * f
    f = kummer_1f1_half_scaled("cosine_odd", mu * mu)
    return 2.0 / math.sqrt(params.lam) / _PI_QUARTER * params.B * f


def cosine_source(parity, params, energy):
    """Right-hand side of row 0 for the cosine-like chain."""
    parity = Parity.coerce(parity)
    mu = energy.mu
    base = params.lam**1.5 / _PI_QUARTER * math.exp(0.5 * mu * mu)
    if parity is Parity.EVEN:
        return -params.A * mu * base / math.sqrt(2.0)
    return 0.5 * params.B * base


def cosine_second(parity, params, energy, c0):
    """``c_1 = (source - J00 c_0) / J01``."""
    parity = Parity.coerce(parity)
    j00 = j_element(parity, 0, 0, params, energy)
    j01 = j_element(parity, 0, 1, params, energy)
    if j01 == 0:
        raise DegenerateError("vanishing J01 coupling")
    return (cosine_source(parity, params, energy) - j00 * c0) / j01


@dataclass(frozen=True)
class ChannelCoefficients:
    """``s_0..s_nmax`` and ``c_0..c_nmax`` of one channel at one energy."""

    parity: Parity
    s: np.ndarray
    c: np.ndarray
    energy: EnergyPoint
    params: BasisParams = field(repr=False)

    @property
    def n_max(self):
        return self.s.shape[0] - 1

    def wronskian(self):
        """Raw ``w_n = s_n c_{n-1} - c_n s_{n-1}`` for ``n = 1..n_max``."""
        return self.s[1:] * self.c[:-1] - self.c[1:] * self.s[:-1]

    def scaled_wronskian(self):
        """``b(n) w_n``, which is independent of ``n``."""
        b = np.array([coupling(self.parity, n) for n in range(1, self.n_max + 1)])
        return b * self.wronskian()

    def expected_scaled_wronskian(self):
        """The constant value of :meth:`scaled_wronskian`: ``-+2 amp^2 mu / lam``."""
        amp = self.params.amplitude(self.parity)
        return -self.parity.sign * 2.0 * amp * amp * self.energy.mu / self.params.lam

    def f(self, branch):
        """Even-channel combination ``(s +- i c) / 2A``."""
        if self.parity is not Parity.EVEN:
            raise DomainError("f is built from the even channel")
        sg = Parity.coerce(branch).sign
        return (self.s + sg * 1j * self.c) / (2.0 * self.params.A)

    def g(self, branch):
        """Odd-channel combination ``(c +- i s) / 2B``."""
        if self.parity is not Parity.ODD:
            raise DomainError("g is built from the odd channel")
        sg = Parity.coerce(branch).sign
        return (self.c + sg * 1j * self.s) / (2.0 * self.params.B)


def channel_coefficients(parity, params, energy, n_max, sine="analytic"):
    """Build :class:`ChannelCoefficients` up to ``n_max``.

    Parameters
    ----------
    sine : {"analytic", "recursion"}
        How the ``s_n`` are produced. ``c_n`` always comes from the seed,
        the source-corrected second term, then forward recursion.
    """
    parity = Parity.coerce(parity)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    mu = energy.mu
    s = np.empty(n_max + 1)
    c = np.empty(n_max + 1)
    if sine == "analytic":
        h = hermite_table(parity.hermite_degree(n_max), mu)
        idx = np.arange(n_max + 1)
        sign = np.where(idx % 2, -1.0, 1.0)
        amp = params.amplitude(parity)
        pref = _PI_QUARTER * math.sqrt(2.0 / params.lam) * amp * math.exp(-0.5 * mu * mu)
        start = 0 if parity is Parity.EVEN else 1
        s[:] = sign * pref * h[start::2][: n_max + 1]
    elif sine == "recursion":
        s[0] = sine_seed(parity, params, energy)
        s[1] = sine_first(parity, s[0], mu)
        for n in range(1, n_max):
            s[n + 1] = sine_recursion_step(parity, n, s[n], s[n - 1], mu)
    else:
        raise DomainError(f"unknown sine mode {sine!r}")
    c[0] = cosine_seed(parity, params, energy)
    c[1] = cosine_second(parity, params, energy, c[0])
    d = parity.diagonal_offset
    b = np.array([coupling(parity, n) for n in range(n_max + 1)])
    mu2 = mu * mu
    for n in range(1, n_max):
        c[n + 1] = ((2 * n + d - mu2) * c[n] - b[n] * c[n - 1]) / b[n + 1]
    s.setflags(write=False)
    c.setflags(write=False)
    return ChannelCoefficients(parity, s, c, energy, params)


def energy_ode_residual(parity, n, coeff_fn, mu, h):
    """Central-difference residual of ``[d2/dmu2 - mu^2 + 2(2n+1) -+ 1] f = 0``.

    ``coeff_fn(mu)`` returns the coefficient (``s_n`` or ``c_n``) at ``mu``.
    """
    parity = Parity.coerce(parity)
    f0 = coeff_fn(mu)
    d2 = (coeff_fn(mu + h) - 2.0 * f0 + coeff_fn(mu - h)) / (h * h)
    return d2 + (-mu * mu + 2 * (2 * n + 1) - parity.sign) * f0


def summation_window(n, M):
    """Weights equal to 1 up to ``M/2`` with a raised-cosine taper to 0 at ``M``.

    The expansion coefficients of a plane wave do not decay, so plain
    truncation converges only like ``M**-0.5``; the taper removes the
    truncation ripple.
    """
    n = np.asarray(n, dtype=float)
    half = 0.5 * M
    taper = 0.5 * (1.0 + np.cos(np.pi * (n - half) / half))
    return np.where(n <= half, 1.0, np.where(n <= M, taper, 0.0))


def _windowed_sums(coeff, parity, N, x, params, M):
    # windows M and M/2 accumulated in one sweep of the Hermite recursion
    y = params.lam * np.asarray(x, dtype=float)
    w_full = summation_window(np.arange(M + 1), M)
    w_half = summation_window(np.arange(M + 1), M // 2)
    acc_full = np.zeros_like(y)
    acc_half = np.zeros_like(y)
    prev = np.zeros_like(y)
    cur = math.sqrt(params.lam) / _PI_QUARTER * np.exp(-0.5 * y * y)
    start = 0 if parity is Parity.EVEN else 1
    top = parity.hermite_degree(M)
    for m in range(top + 1):
        if m >= start and (m - start) % 2 == 0:
            n = (m - start) // 2
            if n >= N:
                acc_full += (w_full[n] * coeff[n]) * cur
                acc_half += (w_half[n] * coeff[n]) * cur
        prev, cur = cur, (y * cur - math.sqrt(m / 2.0) * prev) / math.sqrt((m + 1) / 2.0)
    return acc_full, acc_half


def default_sum_order(N, x, params):
    xmax = float(np.max(np.abs(x))) if np.size(x) else 0.0
    return int(max(4 * N + 200, 2 * (params.lam * xmax) ** 2 + 200))


def partial_sum(parity, kind, N, x, coeffs=None, params=None, energy=None, tol=1e-10, n_max=None,
                max_order=20000):
    """``sum_{n >= N} coeff_n phi_n(x)`` for the sine- or cosine-like chain.

    The infinite sum is evaluated with :func:`summation_window` at order
    ``M`` and compared with order ``M/2``; ``M`` doubles until the two
    agree within ``tol * max(1, |value|)``.

    Parameters
    ----------
    coeffs : ChannelCoefficients, optional
        Used when it already reaches the required order; otherwise the
        chain is rebuilt from ``coeffs.energy``.
    energy : EnergyPoint, optional
        Needed when ``coeffs`` is not given.

    Raises
    ------
    ConvergenceError
        If the tail estimate stays above ``tol`` up to ``max_order``.
    """
    parity = Parity.coerce(parity)
    if kind not in ("sine", "cosine"):
        raise DomainError("kind must be 'sine' or 'cosine'")
    if coeffs is not None:
        params = coeffs.params
        energy = coeffs.energy
    if params is None or energy is None:
        raise DomainError("need coeffs, or params and energy")
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    M = n_max if n_max is not None else default_sum_order(N, x, params)
    M = max(int(M), 2 * N + 4)
    M += M % 2
    while True:
        if coeffs is not None and coeffs.n_max >= M:
            ch = coeffs
        else:
            ch = channel_coefficients(parity, params, energy, M)
        arr = ch.s if kind == "sine" else ch.c
        full, half = _windowed_sums(arr, parity, N, x, params, M)
        tail = np.abs(full - half)
        if np.all(tail <= tol * np.maximum(1.0, np.abs(full))):
            return float(full[0]) if scalar else full
        if n_max is not None or 2 * M > max_order:
            raise ConvergenceError(
                f"partial sum tail {tail.max():.2e} exceeds tolerance {tol:.1e} at order {M}"
            )
        M *= 2


def combination(which, sign, N, x, params, energy, tol=1e-10):
    """The confined combinations of sine- and cosine-like partial sums.

    ``which="cosine"``: ``S+_N/A +- C-_N/B`` (tends to ``2 cos kx`` on one side).
    ``which="sine"``:   ``S-_N/B +- C+_N/A`` (tends to ``2 sin kx`` on one side).
    """
    sg = 1.0 if sign in ("+", 1, +1) else -1.0
    if which == "cosine":
        a = partial_sum(Parity.EVEN, "sine", N, x, params=params, energy=energy, tol=tol) / params.A
        b = partial_sum(Parity.ODD, "cosine", N, x, params=params, energy=energy, tol=tol) / params.B
    elif which == "sine":
        a = partial_sum(Parity.ODD, "sine", N, x, params=params, energy=energy, tol=tol) / params.B
        b = partial_sum(Parity.EVEN, "cosine", N, x, params=params, energy=energy, tol=tol) / params.A
    else:
        raise DomainError("which must be 'cosine' or 'sine'")
    return a + sg * b


def asymptotic_combination(sign, direction, N, x, params, energy, tol=1e-10):
    """Combination tending to ``exp(+-ikx)`` on one side and 0 on the other.

    ``sign="+"`` confines the wave to ``x -> +inf``; ``direction`` is
    ``"outgoing"`` for ``exp(ikx)`` or ``"incoming"`` for ``exp(-ikx)``.
    """
    if direction not in ("outgoing", "incoming"):
        raise DomainError("direction must be 'outgoing' or 'incoming'")
    cos_part = combination("cosine", sign, N, x, params, energy, tol)
    sin_part = combination("sine", sign, N, x, params, energy, tol)
    i = 1j if direction == "outgoing" else -1j
    return 0.5 * cos_part + 0.5 * i * sin_part
