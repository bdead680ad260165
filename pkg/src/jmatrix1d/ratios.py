"""Ratio chains that replace the raw expansion coefficients.

With ``f+-_n = (s+_n +- i c+_n) / 2A`` (even channel) and
``g+-_n = (c-_n +- i s-_n) / 2B`` (odd channel) the amplitude formulas only
need

    alpha+-_n = f+-_n / f+-_{n-1}      beta+-_n = g+-_n / g+-_{n-1}
    gamma+-_n = f+-_n / g+-_n          rho_n = f-_n / f+_n
    sigma_n   = g-_n / g+_n

which stay O(1) where ``s_n`` underflows and ``c_n`` overflows. The
``alpha`` and ``beta`` chains are advanced by the same three-term
recursion the coefficients obey; ``gamma``, ``rho`` and ``sigma`` follow
by multiplication.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DomainError, RatioDivisionError
from .reference_kinematics import (
    BasisParams,
    EnergyPoint,
    Parity,
    cosine_second,
    cosine_seed,
    sine_first,
    sine_seed,
)

__all__ = [
    "FGSeeds",
    "RatioSet",
    "fg_seeds",
    "seeds_for_energy",
    "alpha_step",
    "beta_step",
    "alpha_continued_fraction",
    "beta_continued_fraction",
    "ratio_pipeline",
    "ratio_stages",
    "RATIO_FIELDS",
    "NODE_PERTURBATION",
]

RATIO_FIELDS = _backend.RATIO_FIELDS

# relative shift of mu used once when a chain hits an exact zero
NODE_PERTURBATION = 1e-10


@dataclass(frozen=True)
class FGSeeds:
    """``f+-_0, f+-_1, g+-_0, g+-_1`` at one energy."""

    fp0: complex
    fp1: complex
    fm0: complex
    fm1: complex
    gp0: complex
    gp1: complex
    gm0: complex
    gm1: complex

    def initial(self):
        """``(alpha1+, alpha1-, beta1+, beta1-, gamma0+, gamma0-, rho0, sigma0)``."""
        try:
            return (
                self.fp1 / self.fp0,
                self.fm1 / self.fm0,
                self.gp1 / self.gp0,
                self.gm1 / self.gm0,
                self.fp0 / self.gp0,
                self.fm0 / self.gm0,
                self.fm0 / self.fp0,
                self.gm0 / self.gp0,
            )
        except ZeroDivisionError as exc:
            raise RatioDivisionError("vanishing seed", stage=0) from exc


def _fg(s0, s1, c0, c1, A):
    return (
        complex(s0, c0) / (2 * A),
        complex(s1, c1) / (2 * A),
        complex(s0, -c0) / (2 * A),
        complex(s1, -c1) / (2 * A),
    )


def fg_seeds(channels_even, channels_odd, params=None):
    """Form the eight complex seeds from the first two coefficients of each channel.

    ``f`` comes from the even channel and ``g`` from the odd one, with the
    roles of ``s`` and ``c`` exchanged in ``g``.
    """
    params = params or channels_even.params
    se, ce = channels_even.s, channels_even.c
    so, co = channels_odd.s, channels_odd.c
    fp0, fp1, fm0, fm1 = _fg(se[0], se[1], ce[0], ce[1], params.A)
    gp0, gp1, gm0, gm1 = _fg(co[0], co[1], so[0], so[1], params.B)
    return FGSeeds(fp0, fp1, fm0, fm1, gp0, gp1, gm0, gm1)


def seeds_for_energy(params, energy):
    """:class:`FGSeeds` directly from the closed-form seeds, no chains built."""
    out = {}
    for parity in (Parity.EVEN, Parity.ODD):
        s0 = sine_seed(parity, params, energy)
        s1 = sine_first(parity, s0, energy.mu)
        c0 = cosine_seed(parity, params, energy)
        c1 = cosine_second(parity, params, energy, c0)
        out[parity] = (s0, s1, c0, c1)
    s0, s1, c0, c1 = out[Parity.EVEN]
    fp0, fp1, fm0, fm1 = _fg(s0, s1, c0, c1, params.A)
    s0, s1, c0, c1 = out[Parity.ODD]
    gp0, gp1, gm0, gm1 = _fg(c0, c1, s0, s1, params.B)
    return FGSeeds(fp0, fp1, fm0, fm1, gp0, gp1, gm0, gm1)


def alpha_step(alpha_n, n, mu):
    """``alpha_{n+1}`` from ``alpha_n`` (``n >= 1``)."""
    if n < 1:
        raise DomainError("alpha_step needs n >= 1")
    if alpha_n == 0:
        raise RatioDivisionError("alpha vanished", stage=n)
    b_next = math.sqrt((n + 1) * (n + 0.5))
    return (2 * n + 0.5 - mu * mu) / b_next - math.sqrt(n * (n - 0.5)) / b_next / alpha_n


def beta_step(beta_n, n, mu):
    """``beta_{n+1}`` from ``beta_n`` (``n >= 1``)."""
    if n < 1:
        raise DomainError("beta_step needs n >= 1")
    if beta_n == 0:
        raise RatioDivisionError("beta vanished", stage=n)
    b_next = math.sqrt((n + 1) * (n + 1.5))
    return (2 * n + 1.5 - mu * mu) / b_next - math.sqrt(n * (n + 0.5)) / b_next / beta_n


def _continued_fraction(n, first, mu, d):
    # v_j = -b(j) r_j obeys v_j = mu^2 - (2j - 2 + d) - b(j-1)^2 / v_{j-1}
    if n < 2:
        raise DomainError("continued fraction needs n >= 2")

    def b2(j):
        return j * (j - 1.0 + d)

    mu2 = mu * mu
    if first == 0:
        raise RatioDivisionError("vanishing first ratio", stage=1)
    v = mu2 - (2.0 + d) + math.sqrt(b2(1)) / first
    for j in range(3, n + 1):
        if v == 0:
            raise RatioDivisionError("vanishing partial denominator", stage=j - 1)
        v = mu2 - (2.0 * j - 2.0 + d) - b2(j - 1) / v
    return -v / math.sqrt(b2(n))


def alpha_continued_fraction(n, alpha_1, mu):
    """``alpha_n`` as the finite continued fraction ending in ``alpha_1``."""
    return _continued_fraction(n, alpha_1, mu, 0.5)


def beta_continued_fraction(n, beta_1, mu):
    """``beta_n`` as the finite continued fraction ending in ``beta_1``."""
    return _continued_fraction(n, beta_1, mu, 1.5)


@dataclass(frozen=True)
class RatioSet:
    """All ratio families at stage ``n``.

    Fields are complex scalars, or arrays over an energy grid when
    produced by :func:`ratio_stages`. At ``n = 0`` the ``alpha`` and
    ``beta`` fields are undefined (NaN).
    """

    n: int
    alpha_p: complex
    alpha_m: complex
    beta_p: complex
    beta_m: complex
    gamma_p: complex
    gamma_m: complex
    rho: complex
    sigma: complex

    def as_tuple(self):
        return tuple(getattr(self, f) for f in RATIO_FIELDS)


def ratio_pipeline(target_n, seeds, mu):
    """Advance the chains from the seeds to stage ``target_n`` (scalar reference path).

    Raises
    ------
    RatioDivisionError
        With ``stage`` set to the stage whose update divided by zero.
    """
    if target_n < 0:
        raise DomainError("target_n must be >= 0")
    ap, am, bp, bm, gp, gm, rho, sig = seeds.initial()
    if target_n == 0:
        nan = complex(math.nan, math.nan)
        return RatioSet(0, nan, nan, nan, nan, gp, gm, rho, sig)
    for n in range(1, target_n + 1):
        if n > 1:
            ap, am = alpha_step(ap, n - 1, mu), alpha_step(am, n - 1, mu)
            bp, bm = beta_step(bp, n - 1, mu), beta_step(bm, n - 1, mu)
        if bp == 0 or bm == 0 or ap == 0:
            raise RatioDivisionError("vanishing ratio", stage=n)
        gp *= ap / bp
        gm *= am / bm
        rho *= am / ap
        sig *= bm / bp
    return RatioSet(target_n, ap, am, bp, bm, gp, gm, rho, sig)


def _seed_arrays(params, mus):
    rows = []
    for mu in mus:
        rows.append(seeds_for_energy(params, EnergyPoint.from_mu(float(mu), params)).initial())
    return [np.array(col, dtype=complex) for col in zip(*rows)] if rows else [np.empty(0, complex)] * 8


def _run(params, mus, n):
    init = _seed_arrays(params, mus)
    out, ok = _backend.ratio_stages(np.ascontiguousarray(mus * mus), *init, n)
    return np.asarray(out), np.asarray(ok, dtype=bool)


def ratio_stages(n, mus, params=None):
    """Ratio sets at stages ``n - 1`` and ``n`` for every ``mu`` in ``mus``.

    An energy whose chain divides by zero is retried once with ``mu``
    shifted by ``NODE_PERTURBATION`` relative; if that also fails its
    entries are NaN and its ``ok`` flag is False.

    Returns
    -------
    previous, current : RatioSet
        Array-valued fields.
    ok : ndarray of bool
    """
    if n < 1:
        raise DomainError("n must be >= 1")
    params = params or BasisParams()
    mus = np.atleast_1d(np.asarray(mus, dtype=float))
    if np.any(~(mus > 0)):
        raise DomainError("mu must be positive")
    out, ok = _run(params, mus, n)
    if not ok.all():
        bad = np.flatnonzero(~ok)
        out2, ok2 = _run(params, mus[bad] * (1.0 + NODE_PERTURBATION), n)
        out[bad] = out2
        ok[bad] = ok2
    prev = RatioSet(n - 1, *(out[:, 0, i] for i in range(len(RATIO_FIELDS))))
    cur = RatioSet(n, *(out[:, 1, i] for i in range(len(RATIO_FIELDS))))
    return prev, cur, ok
