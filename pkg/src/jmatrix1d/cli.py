"""Command-line front end (``jmx``).

Subcommands
-----------
sweep     amplitudes over an energy grid, optionally compared with the
          exact closed form or the transfer-matrix solver
plateau   |T|^2 stability over (N, lambda) at one energy
figures   confined partial-sum combinations of the free problem on an x grid
oracle    transfer-matrix amplitudes only

Exit status: 0 on success, 2 on usage errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import DomainError, JMatrixError, NoPlateauError, ParseError
from .oracle import solve_rt
from .potentials import (
    DoubleBarrier,
    ExpressionPotential,
    PoschlTeller,
    SquareBarrier,
    ZeroPotential,
    exact_poschl_teller_transmission,
    exact_square_barrier,
    load_table,
)
from .reference_kinematics import BasisParams, EnergyPoint, combination
from .scattering_core import JMatrixSolver, PoleWarning, plateau_scan

__all__ = [
    "RunConfig",
    "UsageError",
    "build_parser",
    "parse_args",
    "run_sweep",
    "run_plateau",
    "run_figures",
    "run_oracle",
    "format_csv",
    "read_csv",
    "main",
]

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SWEEP_COLUMNS = (
    "E",
    "T2",
    "R2",
    "ReT",
    "ImT",
    "ReR",
    "ImR",
    "theta_p",
    "theta_m",
    "unitarity_defect",
    "status",
)

FIGURE_SIGNS = {"fig1a": "+", "fig1b": "-"}


class UsageError(Exception):
    """Invalid command-line input; maps to exit status 2."""


@dataclass
class RunConfig:
    """Validated settings for one CLI invocation."""

    command: str
    potential: dict = field(default_factory=dict)
    N: int = 50
    lam: float = 1.0
    K: int | None = None
    emin: float = 1e-4
    emax: float = 5.0
    n_points: int = 200
    grid: str = "linear"
    method: str = "auto"
    compare: str = "none"
    fmt: str = "csv"
    output: str | None = None
    probe_energy: float = 1.0
    N_list: tuple = (40, 80)
    lambda_list: tuple = ()
    tol: float = 1e-4
    which: str = "fig1a"
    x_min: float = -20.0
    x_max: float = 20.0
    n_x: int = 401
    sum_tol: float = 1e-8

    def energies(self):
        if self.grid == "log":
            return np.geomspace(self.emin, self.emax, self.n_points)
        return np.linspace(self.emin, self.emax, self.n_points)


def _add_potential_args(p):
    g = p.add_argument_group("potential")
    g.add_argument(
        "--potential",
        default="poschl-teller",
        choices=["poschl-teller", "square-barrier", "double-barrier", "zero", "expr", "table"],
    )
    g.add_argument("--eta", type=float, default=2.0, help="Pöschl-Teller inverse width")
    g.add_argument("--nu", type=float, default=2.5, help="Pöschl-Teller strength")
    g.add_argument("--V0", type=float, default=None, help="barrier height (square 2.0, double 5.0)")
    g.add_argument("--L", type=float, default=3.5, help="square barrier width")
    g.add_argument("--offset", type=float, default=0.0, help="square barrier left edge")
    g.add_argument("--a", type=float, default=1.0, help="double barrier half-width")
    g.add_argument("--expr", default=None, help="expression in x, e.g. '5*sin(pi*x)^2'")
    g.add_argument("--cutoff", type=float, default=None, help="expression potential is zero beyond |x| > cutoff")
    g.add_argument("--table", default=None, help="path of a two-column 'x value' file")


def _add_basis_args(p, with_lambda=True):
    p.add_argument("--N", type=int, default=50, help="basis functions per parity channel")
    if with_lambda:
        p.add_argument("--lambda", dest="lam", type=float, default=1.0, help="basis scale (inverse length)")
    p.add_argument("--K", type=int, default=None, help="quadrature size (default max(2N+50, 4N))")


def _add_grid_args(p, emin=1e-4, emax=5.0):
    p.add_argument("--emin", type=float, default=emin)
    p.add_argument("--emax", type=float, default=emax)
    p.add_argument("--n-points", type=int, default=200)
    p.add_argument("--grid", choices=["linear", "log"], default="linear")


def _add_output_args(p):
    p.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
    p.add_argument("--output", "-o", default=None, help="file to write (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="jmx", description="J-matrix scattering on the line.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="amplitudes over an energy grid")
    _add_potential_args(p)
    _add_basis_args(p)
    _add_grid_args(p)
    p.add_argument("--method", choices=["auto", "general", "even"], default="auto")
    p.add_argument("--compare", choices=["none", "exact", "oracle"], default="none")
    _add_output_args(p)

    p = sub.add_parser("plateau", help="|T|^2 over an (N, lambda) grid at one energy")
    _add_potential_args(p)
    p.add_argument("--E", dest="probe_energy", type=float, default=1.0)
    p.add_argument("--N-list", default="40,80", help="comma-separated N values")
    p.add_argument("--lambda-min", type=float, default=0.5)
    p.add_argument("--lambda-max", type=float, default=4.0)
    p.add_argument("--lambda-step", type=float, default=0.05)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--K", type=int, default=None)
    _add_output_args(p)

    p = sub.add_parser("figures", help="confined partial-sum combinations on an x grid")
    p.add_argument("--which", choices=sorted(FIGURE_SIGNS), default="fig1a")
    p.add_argument("--E", dest="probe_energy", type=float, default=0.5)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--N-list", default="0,10,30")
    p.add_argument("--x-min", type=float, default=-20.0)
    p.add_argument("--x-max", type=float, default=20.0)
    p.add_argument("--n-x", type=int, default=401)
    p.add_argument("--sum-tol", type=float, default=1e-8, help="tail tolerance of the tapered sums")
    _add_output_args(p)

    p = sub.add_parser("oracle", help="transfer-matrix amplitudes")
    _add_potential_args(p)
    _add_grid_args(p, emin=0.05)
    _add_output_args(p)
    return parser


def _int_list(text, flag):
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag}: empty list")
    return vals


def _potential_config(ns):
    kind = ns.potential
    if kind == "poschl-teller":
        if not ns.eta > 0:
            raise UsageError("--eta must be positive")
        return {"kind": kind, "eta": ns.eta, "nu": ns.nu}
    if kind == "square-barrier":
        if not ns.L > 0:
            raise UsageError("--L must be positive")
        return {"kind": kind, "V0": 2.0 if ns.V0 is None else ns.V0, "L": ns.L, "offset": ns.offset}
    if kind == "double-barrier":
        if not ns.a > 0:
            raise UsageError("--a must be positive")
        return {"kind": kind, "V0": 5.0 if ns.V0 is None else ns.V0, "a": ns.a}
    if kind == "zero":
        return {"kind": kind}
    if kind == "expr":
        if ns.expr is None:
            raise UsageError("--potential expr requires --expr")
        if ns.cutoff is not None and not ns.cutoff > 0:
            raise UsageError("--cutoff must be positive")
        try:
            ExpressionPotential(ns.expr, ns.cutoff)
        except ParseError as exc:
            raise UsageError(f"--expr: {exc}") from None
        return {"kind": kind, "expr": ns.expr, "cutoff": ns.cutoff}
    if ns.table is None:
        raise UsageError("--potential table requires --table")
    return {"kind": kind, "path": ns.table}


def make_from_config(desc):
    """Instantiate the potential described by a :class:`RunConfig` ``potential`` dict."""
    kind = desc["kind"]
    if kind == "poschl-teller":
        return PoschlTeller(desc["eta"], desc["nu"])
    if kind == "square-barrier":
        return SquareBarrier(desc["V0"], desc["L"], desc["offset"])
    if kind == "double-barrier":
        return DoubleBarrier(desc["V0"], desc["a"])
    if kind == "zero":
        return ZeroPotential()
    if kind == "expr":
        return ExpressionPotential(desc["expr"], desc["cutoff"])
    return load_table(desc["path"])


def parse_args(argv=None):
    """Parse and validate ``argv`` into a :class:`RunConfig`.

    Raises
    ------
    UsageError
        Naming the offending flag. ``argparse``'s own errors exit with
        status 2 directly.
    """
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(command=ns.command)
    cfg.fmt = ns.fmt
    cfg.output = ns.output
    if ns.command in ("sweep", "plateau", "oracle"):
        cfg.potential = _potential_config(ns)
    if ns.command in ("sweep", "oracle"):
        if not ns.emin > 0:
            raise UsageError("--emin must be > 0 (E = 0 is excluded)")
        if not ns.emax >= ns.emin:
            raise UsageError("--emax must be >= --emin")
        if ns.n_points < 1:
            raise UsageError("--n-points must be >= 1")
        cfg.emin, cfg.emax, cfg.n_points, cfg.grid = ns.emin, ns.emax, ns.n_points, ns.grid
    if ns.command == "sweep":
        if ns.N < 2:
            raise UsageError("--N must be >= 2")
        if not ns.lam > 0:
            raise UsageError("--lambda must be positive")
        if ns.K is not None and ns.K <= 2 * ns.N:
            raise UsageError("--K must exceed 2N")
        if ns.compare == "exact" and cfg.potential["kind"] not in ("poschl-teller", "square-barrier", "zero"):
            raise UsageError(f"--compare exact: no closed form for {cfg.potential['kind']}")
        cfg.N, cfg.lam, cfg.K, cfg.method, cfg.compare = ns.N, ns.lam, ns.K, ns.method, ns.compare
    if ns.command == "plateau":
        cfg.N_list = _int_list(ns.N_list, "--N-list")
        if min(cfg.N_list) < 2:
            raise UsageError("--N-list values must be >= 2")
        if not (0 < ns.lambda_min <= ns.lambda_max) or not ns.lambda_step > 0:
            raise UsageError("--lambda-min/--lambda-max/--lambda-step must give a positive ascending range")
        if not ns.probe_energy > 0:
            raise UsageError("--E must be > 0")
        count = int(math.floor((ns.lambda_max - ns.lambda_min) / ns.lambda_step + 1e-9)) + 1
        cfg.lambda_list = tuple(round(ns.lambda_min + i * ns.lambda_step, 12) for i in range(count))
        cfg.probe_energy, cfg.tol, cfg.K = ns.probe_energy, ns.tol, ns.K
    if ns.command == "figures":
        cfg.N_list = _int_list(ns.N_list, "--N-list")
        if min(cfg.N_list) < 0:
            raise UsageError("--N-list values must be >= 0")
        if not ns.probe_energy > 0:
            raise UsageError("--E must be > 0")
        if not ns.lam > 0:
            raise UsageError("--lambda must be positive")
        if ns.n_x < 1 or not ns.x_max >= ns.x_min:
            raise UsageError("--x-min/--x-max/--n-x give an empty grid")
        cfg.which, cfg.probe_energy, cfg.lam = ns.which, ns.probe_energy, ns.lam
        cfg.x_min, cfg.x_max, cfg.n_x, cfg.sum_tol = ns.x_min, ns.x_max, ns.n_x, ns.sum_tol
    return cfg


def _fmt(v):
    if isinstance(v, str):
        return v
    return "%.17g" % v


def format_csv(columns, rows, summary=()):
    """CSV text: header, one line per row (17 significant digits), ``#`` summary lines."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    for line in summary:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def read_csv(text):
    """Inverse of :func:`format_csv`: ``(columns, rows, summary_lines)``.

    Numeric cells become floats; anything else stays a string.
    """
    lines = text.splitlines()
    body = [ln for ln in lines if not ln.startswith("#")]
    summary = [ln[2:] for ln in lines if ln.startswith("# ")]
    reader = csv.reader(body)
    columns = next(reader)
    rows = []
    for rec in reader:
        row = []
        for cell in rec:
            try:
                row.append(float(cell))
            except ValueError:
                row.append(cell)
        rows.append(row)
    return columns, rows, summary


def _json_value(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, (np.floating,)):
        return _json_value(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def format_json(columns, rows, metadata, summary=None):
    records = [{c: _json_value(v) for c, v in zip(columns, row)} for row in rows]
    doc = {"metadata": metadata, "columns": list(columns), "rows": records}
    if summary:
        doc["summary"] = {k: _json_value(v) for k, v in summary.items()}
    return json.dumps(doc, indent=2, allow_nan=False, default=_json_value)


def _metadata(cfg, extra=None):
    meta = {"version": __version__, "backend": BACKEND, "config": asdict(cfg)}
    meta["config"]["N_list"] = list(cfg.N_list)
    meta["config"]["lambda_list"] = list(cfg.lambda_list)
    if extra:
        meta.update(extra)
    return meta


def _emit(cfg, columns, rows, summary, extra_meta=None, stream=None):
    if cfg.fmt == "csv":
        text = format_csv(columns, rows, [f"{k} = {_fmt(float(v))}" for k, v in summary.items()])
    else:
        text = format_json(columns, rows, _metadata(cfg, extra_meta), summary) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        (stream or sys.stdout).write(text)
    return text


def _reference(cfg, pot, energies):
    kind = cfg.potential["kind"]
    if cfg.compare == "exact":
        if kind == "poschl-teller":
            return exact_poschl_teller_transmission(cfg.potential["eta"], cfg.potential["nu"], energies)
        if kind == "square-barrier":
            return exact_square_barrier(cfg.potential["V0"], cfg.potential["L"], energies)[0]
        return np.ones_like(energies)
    return solve_rt(pot, energies).transmission


def run_sweep(cfg, stream=None):
    """Run an energy sweep and write the table; returns the text written."""
    pot = make_from_config(cfg.potential)
    energies = cfg.energies()
    solver = JMatrixSolver(pot, cfg.N, cfg.lam, cfg.K)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", PoleWarning)
        res = solver.sweep(energies, method=cfg.method)
    tp, tm = res.theta
    status = np.where(~res.ok, "failed", np.where(res.nudged, "nudged", "ok"))
    columns = list(SWEEP_COLUMNS)
    cols = [
        res.energies,
        res.transmission,
        res.reflection,
        res.T.real,
        res.T.imag,
        res.R.real,
        res.R.imag,
        tp,
        tm,
        res.unitarity_defect,
    ]
    summary = {"max_abs_unitarity_defect": float(np.nanmax(np.abs(res.unitarity_defect)))}
    if cfg.compare != "none":
        ref = _reference(cfg, pot, energies)
        dev = res.transmission - ref
        columns += [f"{cfg.compare}_T2", "deviation"]
        cols += [ref, dev]
        summary[f"max_abs_deviation_{cfg.compare}"] = float(np.nanmax(np.abs(dev)))
    summary["failed_points"] = float(np.count_nonzero(~res.ok))
    rows = []
    for j in range(energies.size):
        row = [float(c[j]) for c in cols[:10]] + [str(status[j])] + [float(c[j]) for c in cols[10:]]
        rows.append(row)
    order = columns[:10] + ["status"] + columns[11:]
    extra = {"method": res.method, "K": solver.K, "is_even": solver.is_even}
    return _emit(cfg, order, rows, summary, extra, stream)


def run_plateau(cfg, stream=None):
    """Tabulate |T|^2 on the (N, lambda) grid; raises NoPlateauError after writing."""
    pot = make_from_config(cfg.potential)
    try:
        report = plateau_scan(pot, cfg.probe_energy, cfg.N_list, cfg.lambda_list, cfg.tol, cfg.K)
        failure = None
    except NoPlateauError as exc:
        report, failure = exc.report, exc
    columns = ["N", "lambda", "T2"]
    rows = [
        [float(N), float(lam), float(report.table[i, j])]
        for i, N in enumerate(report.N_list)
        for j, lam in enumerate(report.lambda_list)
    ]
    summary = {}
    for N in report.N_list:
        lo, hi = report.intervals[N]
        summary[f"plateau_width_N{N}"] = hi - lo
        summary[f"plateau_lo_N{N}"] = lo
        summary[f"plateau_hi_N{N}"] = hi
    if report.recommended is not None:
        summary["recommended_N"] = float(report.recommended[0])
        summary["recommended_lambda"] = float(report.recommended[1])
    text = _emit(cfg, columns, rows, summary, {"plateau": report.as_dict()}, stream)
    if failure is not None:
        raise failure
    return text


def run_figures(cfg, stream=None):
    """Write the confined combination for each requested ``N`` on an x grid.

    ``fig1a`` is ``S+_N + C-_N`` and ``fig1b`` is ``S-_N + C+_N`` (top
    signs), both tending to twice the plane-wave component on ``x > 0``.
    """
    params = BasisParams(cfg.lam)
    energy = EnergyPoint.from_energy(cfg.probe_energy, params)
    x = np.linspace(cfg.x_min, cfg.x_max, cfg.n_x)
    which = "cosine" if cfg.which == "fig1a" else "sine"
    series = [combination(which, FIGURE_SIGNS["fig1a"], N, x, params, energy, tol=cfg.sum_tol) for N in cfg.N_list]
    columns = ["x"] + [f"N_{N}" for N in cfg.N_list]
    rows = [[float(x[i])] + [float(s[i]) for s in series] for i in range(x.size)]
    summary = {f"max_abs_N{N}": float(np.abs(s).max()) for N, s in zip(cfg.N_list, series)}
    return _emit(cfg, columns, rows, summary, None, stream)


def run_oracle(cfg, stream=None):
    pot = make_from_config(cfg.potential)
    energies = cfg.energies()
    res = solve_rt(pot, energies)
    columns = ["E", "T2", "R2", "ReT", "ImT", "ReR", "ImR", "unitarity_defect", "grid_change"]
    rows = [
        [
            float(res.energies[j]),
            float(res.transmission[j]),
            float(res.reflection[j]),
            float(res.T[j].real),
            float(res.T[j].imag),
            float(res.R[j].real),
            float(res.R[j].imag),
            float(res.unitarity_defect[j]),
            float(res.error[j]),
        ]
        for j in range(energies.size)
    ]
    summary = {"cells": float(res.cells), "max_grid_change": float(res.error.max())}
    return _emit(cfg, columns, rows, summary, {"cells": res.cells, "h": res.h}, stream)


RUNNERS = {"sweep": run_sweep, "plateau": run_plateau, "figures": run_figures, "oracle": run_oracle}


def main(argv=None):
    """Entry point; returns the process exit status."""
    try:
        cfg = parse_args(argv)
    except UsageError as exc:
        print(f"jmx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    try:
        RUNNERS[cfg.command](cfg)
    except (DomainError, ParseError) as exc:
        print(f"jmx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (JMatrixError, ArithmeticError) as exc:
        print(f"jmx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"jmx: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
