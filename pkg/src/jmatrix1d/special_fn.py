"""Special functions used by the kinematics and quadrature layers.

Normalized Hermite polynomials ``Hhat_n(y) = H_n(y) / sqrt(2**n n!)`` are
orthonormal under the weight ``exp(-y**2) / sqrt(pi)`` and obey the
symmetric three-term recursion

    y Hhat_n = sqrt(n/2) Hhat_{n-1} + sqrt((n+1)/2) Hhat_{n+1}.

The two confluent hypergeometric cases ``1F1(1/2; 3/2; z)`` and
``1F1(-1/2; 1/2; z)`` seed the cosine-like coefficients. Because the seeds
always multiply them by ``exp(-z/2)``, the fused evaluator
:func:`kummer_1f1_half_scaled` is the one the rest of the package calls.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, RangeError

__all__ = [
    "hermite_normalized",
    "hermite_table",
    "kummer_1f1_half",
    "kummer_1f1_half_scaled",
    "kummer_series",
    "log_gamma_ratio",
    "KUMMER_KINDS",
]

# (a, c) of 1F1(a; c; z) for each cosine seed
KUMMER_KINDS = {
    "cosine_even": (0.5, 1.5),
    "cosine_odd": (-0.5, 0.5),
}

# Above this argument the prescaled series is replaced by the large-z expansion.
_ASYMPTOTIC_SWITCH = 40.0
_LOG_MAX = math.log(np.finfo(float).max)


def hermite_table(nmax, y):
    """Return ``Hhat_0 .. Hhat_nmax`` at ``y`` stacked along axis 0."""
    if nmax < 0:
        raise DomainError("nmax must be >= 0")
    y = np.asarray(y, dtype=float)
    out = np.empty((nmax + 1,) + y.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * y
    for m in range(1, nmax):
        out[m + 1] = (y * out[m] - math.sqrt(m / 2.0) * out[m - 1]) / math.sqrt((m + 1) / 2.0)
    return out


def hermite_normalized(n, y):
    """Normalized Hermite polynomial of degree ``n`` at ``y`` (scalar or array).

    Computed by forward recursion from ``Hhat_0 = 1``; never through
    factorial-weighted monomials.
    """
    if n < 0:
        raise DomainError("degree must be >= 0")
    y_arr = np.asarray(y, dtype=float)
    prev = np.zeros_like(y_arr)
    cur = np.ones_like(y_arr)
    for m in range(n):
        prev, cur = cur, (y_arr * cur - math.sqrt(m / 2.0) * prev) / math.sqrt((m + 1) / 2.0)
    if np.ndim(y) == 0:
        return float(cur)
    return cur


def _kind(kind):
    try:
        return KUMMER_KINDS[kind]
    except KeyError:
        raise DomainError(f"unknown kind {kind!r}; expected one of {sorted(KUMMER_KINDS)}") from None


def kummer_series(a, c, z, scale=1.0, max_terms=100000):
    """Sum ``scale * 1F1(a; c; z)`` term by term.

    Every term carries ``scale``, so passing ``scale=exp(-z/2)`` keeps the
    partial sums representable well past the point where ``1F1`` itself
    overflows. No cancellation control is attempted; this is only safe
    when the terms do not alternate (true for both seed cases at z >= 0).
    """
    term = scale
    total = term
    for k in range(max_terms):
        term *= (a + k) / (c + k) * z / (k + 1)
        total += term
        if k > z and abs(term) <= 1e-17 * abs(total):
            return total
    raise RangeError("hypergeometric series did not settle")  # pragma: no cover


def _asymptotic_scaled(kind, z):
    # 1F1(a;c;z) ~ Gamma(c)/Gamma(a) e^z z^(a-c) sum_k (c-a)_k (1-a)_k / k! z^-k;
    # for both seed cases this collapses to a single Pochhammer symbol.
    if kind == "cosine_even":
        lead, p = 0.5, 0.5
    else:
        lead, p = -0.5, 1.5
    total = 0.0
    term = 1.0
    k = 0
    while True:
        total += term
        nxt = term * (p + k) / z
        if abs(nxt) < 1e-17 * abs(total) or abs(nxt) > abs(term):
            break
        term = nxt
        k += 1
    if z / 2.0 > _LOG_MAX:
        raise RangeError(f"exp(z/2) overflows at z={z}")
    return lead * math.exp(z / 2.0) / z * total


def kummer_1f1_half_scaled(kind, mu2):
    """``exp(-mu2/2) * 1F1(a; c; mu2)`` for the two cosine-seed cases.

    ``kind`` is ``"cosine_even"`` (a=1/2, c=3/2) or ``"cosine_odd"``
    (a=-1/2, c=1/2).
    """
    a, c = _kind(kind)
    if not mu2 >= 0:
        raise DomainError("mu2 must be >= 0")
    z = float(mu2)
    if z <= _ASYMPTOTIC_SWITCH:
        return kummer_series(a, c, z, scale=math.exp(-z / 2.0))
    return _asymptotic_scaled(kind, z)


def kummer_1f1_half(kind, mu2):
    """``1F1(1/2; 3/2; mu2)`` or ``1F1(-1/2; 1/2; mu2)``.

    Raises
    ------
    RangeError
        If the value is not representable in double precision.
    """
    _kind(kind)
    if not mu2 >= 0:
        raise DomainError("mu2 must be >= 0")
    z = float(mu2)
    if z <= _ASYMPTOTIC_SWITCH:
        a, c = KUMMER_KINDS[kind]
        return kummer_series(a, c, z)
    # log|value| ~ z - log(2z); leave headroom for the series factor
    if z - math.log(2 * z) > _LOG_MAX - 1.0:
        raise RangeError(f"1F1 overflows at mu2={z}")
    return kummer_1f1_half_scaled(kind, z) * math.exp(z / 2.0)


def _stirling_tail(x):
    # ln Gamma(x) - [(x - 1/2) ln x - x + ln(2 pi)/2], valid for x >= 10
    x2 = x * x
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - 1.0 / (1680.0 * x2)) / x2) / x2) / x


def log_gamma_ratio(a, b):
    """``ln Gamma(a) - ln Gamma(b)`` for positive ``a``, ``b``.

    For large arguments the leading Stirling terms are differenced
    analytically so nearby ``a`` and ``b`` do not lose digits to
    cancellation between two huge ``lgamma`` values.
    """
    if not (a > 0 and b > 0):
        raise DomainError("log_gamma_ratio needs positive arguments")
    if a == b:
        return 0.0
    if min(a, b) < 10.0:
        return math.lgamma(a) - math.lgamma(b)
    d = a - b
    main = (a - 0.5) * math.log1p(d / b) + d * math.log(b) - d
    return main + _stirling_tail(a) - _stirling_tail(b)
