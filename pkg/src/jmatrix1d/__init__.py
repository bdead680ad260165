"""Harmonic-oscillator J-matrix scattering on the line."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .errors import JMatrixError
from .oracle import solve_rt
from .potentials import (
    DoubleBarrier,
    ExpressionPotential,
    PoschlTeller,
    SquareBarrier,
    Tabulated,
    ZeroPotential,
    load_table,
    make_potential,
)
from .reference_kinematics import BasisParams, EnergyPoint, Parity
from .scattering_core import JMatrixSolver, plateau_scan

__all__ = [
    "__version__",
    "BACKEND",
    "JMatrixError",
    "JMatrixSolver",
    "plateau_scan",
    "solve_rt",
    "BasisParams",
    "EnergyPoint",
    "Parity",
    "PoschlTeller",
    "SquareBarrier",
    "DoubleBarrier",
    "ZeroPotential",
    "Tabulated",
    "ExpressionPotential",
    "load_table",
    "make_potential",
]
