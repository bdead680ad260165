"""Potential catalog, tabulated and expression potentials, exact amplitudes.

Every potential is a callable ``V(x)`` accepting scalars or arrays and
exposes ``cutoff`` (``V == 0`` for ``|x| > cutoff``, approximately for
the smooth Pöschl-Teller well) and ``breakpoints`` (abscissae where
``V`` or its derivative jumps, so grid-based solvers can align to them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import loggamma

from .errors import DomainError
from .expression import parse_expression

__all__ = [
    "Potential",
    "ZeroPotential",
    "PoschlTeller",
    "SquareBarrier",
    "DoubleBarrier",
    "Tabulated",
    "ExpressionPotential",
    "load_table",
    "make_potential",
    "CATALOG",
    "exact_poschl_teller",
    "exact_poschl_teller_transmission",
    "exact_square_barrier",
]

PT_CUTOFF_RATIO = 1e-12


class Potential:
    """Base class: subclasses implement :meth:`evaluate` on arrays."""

    name = "potential"
    cutoff = math.inf
    breakpoints: tuple = ()

    def evaluate(self, x):  # pragma: no cover - abstract
        raise NotImplementedError

    def __call__(self, x):
        arr = np.asarray(x, dtype=float)
        out = self.evaluate(arr)
        return float(out) if np.ndim(x) == 0 else out

    def describe(self):
        return {"kind": self.name}


@dataclass(frozen=True)
class ZeroPotential(Potential):
    name = "zero"
    cutoff = 0.0

    def evaluate(self, x):
        return np.zeros_like(x)


@dataclass(frozen=True)
class PoschlTeller(Potential):
    """``-(eta^2/2) nu (nu - 1) / cosh^2(eta x)``."""

    eta: float = 2.0
    nu: float = 2.5
    name = "poschl-teller"

    def __post_init__(self):
        if not self.eta > 0:
            raise DomainError("eta must be positive")

    @property
    def depth(self):
        return -0.5 * self.eta**2 * self.nu * (self.nu - 1.0)

    @property
    def cutoff(self):
        # |V(X)| = 1e-12 |V(0)|
        return math.acosh(1.0 / math.sqrt(PT_CUTOFF_RATIO)) / self.eta

    def evaluate(self, x):
        t = np.exp(-2.0 * self.eta * np.abs(x))
        return self.depth * 4.0 * t / (1.0 + t) ** 2

    def describe(self):
        return {"kind": self.name, "eta": self.eta, "nu": self.nu}


@dataclass(frozen=True)
class SquareBarrier(Potential):
    """Height ``V0`` on the closed interval ``[offset, offset + L]``."""

    V0: float = 2.0
    L: float = 3.5
    offset: float = 0.0
    name = "square-barrier"

    def __post_init__(self):
        if not self.L > 0:
            raise DomainError("L must be positive")

    @property
    def cutoff(self):
        return max(abs(self.offset), abs(self.offset + self.L))

    @property
    def breakpoints(self):
        return (self.offset, self.offset + self.L)

    def evaluate(self, x):
        inside = (x >= self.offset) & (x <= self.offset + self.L)
        return np.where(inside, float(self.V0), 0.0)

    def describe(self):
        return {"kind": self.name, "V0": self.V0, "L": self.L, "offset": self.offset}


@dataclass(frozen=True)
class DoubleBarrier(Potential):
    """``V0 sin^2(pi x / a)`` for ``|x| <= a``, zero outside."""

    V0: float = 5.0
    a: float = 1.0
    name = "double-barrier"

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError("a must be positive")

    @property
    def cutoff(self):
        return self.a

    @property
    def breakpoints(self):
        return (-self.a, -0.5 * self.a, 0.0, 0.5 * self.a, self.a)

    def evaluate(self, x):
        inside = np.abs(x) <= self.a
        return np.where(inside, self.V0 * np.sin(np.pi * x / self.a) ** 2, 0.0)

    def describe(self):
        return {"kind": self.name, "V0": self.V0, "a": self.a}


@dataclass(frozen=True)
class Tabulated(Potential):
    """Linear interpolation of ``(x, V)`` samples, zero outside the table."""

    x: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    source: str = ""
    name = "table"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if x.ndim != 1 or x.shape != v.shape or x.size < 2:
            raise DomainError("a table needs at least two (x, V) pairs")
        if np.any(np.diff(x) <= 0):
            raise DomainError("table abscissae must be strictly ascending")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("table entries must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)

    @property
    def cutoff(self):
        return float(max(abs(self.x[0]), abs(self.x[-1])))

    @property
    def breakpoints(self):
        return tuple(float(t) for t in self.x)

    def evaluate(self, x):
        return np.interp(x, self.x, self.v, left=0.0, right=0.0)

    def describe(self):
        return {"kind": self.name, "source": self.source, "points": int(self.x.size)}


def load_table(path):
    """Read a tabulated potential.

    One ``x value`` pair per line, whitespace separated, ascending ``x``;
    blank lines and text after ``#`` are ignored.
    """
    xs, vs = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            parts = body.split()
            if len(parts) != 2:
                raise DomainError(f"{path}:{lineno}: expected two columns, found {len(parts)}")
            try:
                xs.append(float(parts[0]))
                vs.append(float(parts[1]))
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a number") from None
    try:
        return Tabulated(np.array(xs), np.array(vs), str(path))
    except DomainError as exc:
        raise DomainError(f"{path}: {exc}") from None


class ExpressionPotential(Potential):
    """A parsed expression in ``x``, set to zero for ``|x| > cutoff``."""

    name = "expr"

    def __init__(self, source, cutoff=None):
        self.source = source
        self.compiled = parse_expression(source)
        if cutoff is not None and not cutoff > 0:
            raise DomainError("cutoff must be positive")
        self.cutoff = math.inf if cutoff is None else float(cutoff)
        self.breakpoints = () if cutoff is None else (-self.cutoff, self.cutoff)

    def evaluate(self, x):
        if math.isinf(self.cutoff):
            return np.asarray(self.compiled(x), dtype=float)
        inside = np.abs(x) <= self.cutoff
        out = np.zeros_like(x)
        if np.any(inside):
            out[inside] = self.compiled(x[inside])
        return out

    def describe(self):
        return {"kind": self.name, "expr": self.source, "cutoff": self.cutoff}


CATALOG = {
    "zero": ZeroPotential,
    "poschl-teller": PoschlTeller,
    "square-barrier": SquareBarrier,
    "double-barrier": DoubleBarrier,
}


def make_potential(kind, **params):
    """Construct a potential by catalog name (``table`` and ``expr`` included)."""
    key = kind.replace("_", "-").lower()
    if key in CATALOG:
        return CATALOG[key](**params)
    if key == "table":
        return load_table(params["path"])
    if key == "expr":
        return ExpressionPotential(params["source"], params.get("cutoff"))
    raise DomainError(f"unknown potential {kind!r}; choose from {sorted(CATALOG) + ['table', 'expr']}")


def _pt_phase(eta, nu, k, sign):
    z = 1j * k / eta
    # even channel: Gamma(z/2 + nu/2) Gamma(z/2 + (1 - nu)/2)
    # odd channel:  Gamma(z/2 + (nu + 1)/2) Gamma(z/2 + 1 - nu/2)
    a = 0.5 * z + (2 * nu + 1 - sign) / 4.0
    b = 0.5 * z + (3 - sign - 2 * nu) / 4.0
    # Im(a) = Im(b) = k / (2 eta) > 0, so no argument can sit on a Gamma pole
    log_val = loggamma(z) - 1j * (k / eta) * math.log(2.0) - loggamma(a) - loggamma(b)
    return float(np.imag(log_val))


def exact_poschl_teller(eta, nu, E):
    """Exact ``(T, R)`` for the Pöschl-Teller well.

    The phases are the arguments of the complex Gamma-function
    combinations; ``T = (e^{2i th+} - e^{2i th-})/2`` and
    ``R = (e^{2i th+} + e^{2i th-})/2``.
    """
    if not E > 0:
        raise DomainError("E must be positive")
    k = math.sqrt(2.0 * E)
    tp = _pt_phase(eta, nu, k, +1)
    tm = _pt_phase(eta, nu, k, -1)
    ep, em = np.exp(2j * tp), np.exp(2j * tm)
    return complex(0.5 * (ep - em)), complex(0.5 * (ep + em))


def exact_poschl_teller_transmission(eta, nu, E):
    """``|T|^2 = 1 / (1 + p^-2)`` with ``p = sinh(pi k / eta) / sin(nu pi)`` (arrays allowed)."""
    E = np.asarray(E, dtype=float)
    k = np.sqrt(2.0 * E)
    s = math.sin(nu * math.pi)
    if abs(s) < 1e-15:
        return np.ones_like(E) if E.ndim else 1.0
    inv_p = s / np.sinh(np.pi * k / eta)
    out = 1.0 / (1.0 + inv_p**2)
    return out if E.ndim else float(out)


def exact_square_barrier(V0, L, E):
    """``(|T|^2, |R|^2)`` for a rectangular barrier (arrays allowed).

    ``q = V0 sinh(kh L) / (k kh)`` below the top, ``V0 sin(kh L) / (k kh)``
    above it, with ``kh = sqrt(2|E - V0|)``; at ``E = V0`` the limit
    ``q = V0 L / k`` is used.
    """
    E = np.asarray(E, dtype=float)
    if np.any(~(E > 0)):
        raise DomainError("E must be positive")
    k = np.sqrt(2.0 * E)
    kh = np.sqrt(2.0 * np.abs(E - V0))
    x = kh * L
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        small = x < 1e-6
        # sinh(x)/x and sin(x)/x with their series near zero
        shx = np.where(small, 1.0 + x * x / 6.0, np.sinh(x) / x)
        sx = np.where(small, 1.0 - x * x / 6.0, np.sin(x) / x)
        ratio = np.where(E < V0, shx, sx)
        q = V0 * L * ratio / k
        T2 = np.where(np.isfinite(q), 1.0 / (1.0 + q * q), 0.0)
        R2 = np.where(np.isfinite(q), q * q / (1.0 + q * q), 1.0)
    if E.ndim == 0:
        return float(T2), float(R2)
    return T2, R2
