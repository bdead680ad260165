import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jmatrix1d import __version__
from jmatrix1d.cli import (
    SWEEP_COLUMNS,
    UsageError,
    format_csv,
    main,
    parse_args,
    read_csv,
    run_sweep,
)
from jmatrix1d.potentials import exact_square_barrier


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_reference_sweep_config():
    cfg = parse_args(
        "sweep --potential poschl-teller --eta 2.0 --nu 2.5 --emin 0.05 --emax 5 --n-points 200 "
        "--N 50 --lambda 1.0 --compare exact --format csv".split()
    )
    assert cfg.potential == {"kind": "poschl-teller", "eta": 2.0, "nu": 2.5}
    assert (cfg.N, cfg.lam, cfg.n_points, cfg.compare, cfg.fmt) == (50, 1.0, 200, "exact", "csv")
    assert cfg.energies()[0] == 0.05 and cfg.energies()[-1] == 5.0


def test_parse_expression_config():
    cfg = parse_args(["sweep", "--potential", "expr", "--expr", "5*sin(3.14159*x/1.0)^2", "--cutoff", "1.0"])
    assert cfg.potential == {"kind": "expr", "expr": "5*sin(3.14159*x/1.0)^2", "cutoff": 1.0}


@pytest.mark.parametrize(
    "argv,flag",
    [
        (["sweep", "--emin", "0"], "--emin"),
        (["sweep", "--n-points", "0"], "--n-points"),
        (["sweep", "--N", "1"], "--N"),
        (["sweep", "--K", "20", "--N", "10"], "--K"),
        (["sweep", "--potential", "expr"], "--expr"),
        (["sweep", "--potential", "expr", "--expr", "5*sin("], "--expr"),
        (["sweep", "--potential", "table"], "--table"),
        (["sweep", "--potential", "double-barrier", "--compare", "exact"], "--compare"),
        (["plateau", "--N-list", "4,x"], "--N-list"),
        (["figures", "--E", "-1"], "--E"),
    ],
)
def test_usage_errors_name_the_flag(argv, flag, capsys):
    with pytest.raises(UsageError, match=flag):
        parse_args(argv)
    code, _, err = run(argv, capsys)
    assert code == 2
    assert flag in err


def test_argparse_errors_exit_2(capsys):
    assert main(["sweep", "--grid", "cubic"]) == 2
    assert main(["nonsense"]) == 2
    assert main([]) == 2


def test_sweep_csv_columns_and_summary(capsys):
    code, out, _ = run(["sweep", "--potential", "zero", "--N", "10", "--n-points", "7"], capsys)
    assert code == 0
    cols, rows, summary = read_csv(out)
    assert tuple(cols) == SWEEP_COLUMNS
    assert len(rows) == 7
    T2 = np.array([r[1] for r in rows])
    assert np.abs(T2 - 1).max() < 1e-8
    assert all(r[10] == "ok" for r in rows)
    assert summary[0].startswith("max_abs_unitarity_defect = ")


def test_sweep_compare_exact_square_barrier(capsys):
    argv = "sweep --potential square-barrier --V0 2 --L 3.5 --N 40 --lambda 2 --emin 0.1 --emax 6 --n-points 25 --compare exact"
    code, out, _ = run(argv.split(), capsys)
    assert code == 0
    cols, rows, summary = read_csv(out)
    assert cols[-2:] == ["exact_T2", "deviation"]
    E = np.array([r[0] for r in rows])
    assert np.allclose([r[11] for r in rows], exact_square_barrier(2.0, 3.5, E)[0], rtol=1e-15)
    worst = max(abs(r[12]) for r in rows)
    assert any(line == f"max_abs_deviation_exact = {worst:.17g}" for line in summary)


def test_sweep_compare_oracle_json(tmp_path, capsys):
    path = tmp_path / "out.json"
    argv = f"sweep --potential double-barrier --N 30 --lambda 3 --emin 1 --emax 5 --n-points 4 --compare oracle --format json --output {path}"
    code, out, _ = run(argv.split(), capsys)
    assert code == 0 and out == ""
    doc = json.loads(path.read_text())
    assert doc["metadata"]["version"] == __version__
    assert doc["metadata"]["config"]["potential"]["kind"] == "double-barrier"
    assert doc["columns"][-2:] == ["oracle_T2", "deviation"]
    assert len(doc["rows"]) == 4
    assert set(doc["summary"]) >= {"max_abs_deviation_oracle", "max_abs_unitarity_defect"}


def test_tabulated_potential_from_file(tmp_path, capsys):
    f = tmp_path / "v.dat"
    xs = np.linspace(-1, 1, 41)
    f.write_text("# double barrier samples\n" + "\n".join(f"{x:.17g} {5 * math.sin(math.pi * x) ** 2:.17g}" for x in xs))
    code, out, _ = run(["oracle", "--potential", "table", "--table", str(f), "--n-points", "3", "--emin", "1"], capsys)
    assert code == 0
    cols, rows, _ = read_csv(out)
    assert cols[0] == "E" and len(rows) == 3
    assert main(["oracle", "--potential", "table", "--table", str(tmp_path / "missing.dat")]) == 2


def test_csv_round_trip_of_sweep(capsys):
    code, out, _ = run(["sweep", "--N", "20", "--n-points", "9", "--compare", "exact"], capsys)
    cols, rows, summary = read_csv(out)
    again = format_csv(cols, rows, summary)
    assert again == out


@given(
    rows=st.lists(
        st.tuples(st.floats(allow_nan=False), st.floats(allow_nan=False, allow_infinity=False), st.sampled_from(["ok", "nudged", "failed"])),
        min_size=1,
        max_size=20,
    )
)
def test_csv_round_trip_bit_exact(rows):
    text = format_csv(["a", "b", "status"], [list(r) for r in rows])
    cols, back, _ = read_csv(text)
    assert cols == ["a", "b", "status"]
    for r, b in zip(rows, back):
        assert [float(r[0]), float(r[1]), r[2]] == b
        assert math.copysign(1.0, r[1]) == math.copysign(1.0, b[1])


def test_failed_rows_are_flagged_not_fatal(monkeypatch, capsys):
    from jmatrix1d import scattering_core

    real = scattering_core.JMatrixSolver._chunk

    def flaky(self, energies, method):
        E, wp, wm, ok, moved = real(self, energies, method)
        ok = ok.copy()
        ok[0] = False
        wp = wp.copy()
        wp[0] = np.nan
        return E, wp, wm, ok, moved

    monkeypatch.setattr(scattering_core.JMatrixSolver, "_chunk", flaky)
    code, out, _ = run(["sweep", "--N", "10", "--n-points", "3"], capsys)
    assert code == 0
    _, rows, summary = read_csv(out)
    assert rows[0][10] == "failed" and math.isnan(rows[0][1])
    assert rows[1][10] == "ok"
    assert "failed_points = 1" in summary


def test_plateau_command(capsys):
    argv = "plateau --potential zero --N-list 10,20 --lambda-min 0.5 --lambda-max 1.5 --lambda-step 0.5 --format json"
    code, out, _ = run(argv.split(), capsys)
    assert code == 0
    doc = json.loads(out)
    assert doc["metadata"]["plateau"]["recommended"][0] == 20
    assert doc["summary"]["plateau_width_N20"] == pytest.approx(1.0)


def test_plateau_failure_exit_3(capsys):
    argv = "plateau --N-list 8 --lambda-min 0.5 --lambda-max 2.5 --lambda-step 1 --tol 1e-14"
    code, out, err = run(argv.split(), capsys)
    assert code == 3
    assert "numerical failure" in err
    assert out.startswith("N,lambda,T2")


def test_figures_command(capsys):
    code, out, _ = run(["figures", "--which", "fig1a", "--n-x", "9", "--x-min", "-16", "--x-max", "16"], capsys)
    assert code == 0
    cols, rows, _ = read_csv(out)
    assert cols == ["x", "N_0", "N_10", "N_30"]
    x = np.array([r[0] for r in rows])
    far = np.abs(x) >= 12
    k = 1.0
    n30 = np.array([r[3] for r in rows])
    assert np.allclose(n30[far & (x > 0)], 2 * np.cos(k * x[far & (x > 0)]), atol=1e-2)
    assert np.allclose(n30[far & (x < 0)], 0.0, atol=1e-2)


def test_figures_sine_combination(capsys):
    code, out, _ = run(["figures", "--which", "fig1b", "--n-x", "5", "--x-min", "14", "--x-max", "16", "--N-list", "10"], capsys)
    assert code == 0
    _, rows, _ = read_csv(out)
    x = np.array([r[0] for r in rows])
    assert np.allclose([r[1] for r in rows], 2 * np.sin(x), atol=1e-2)


def test_entry_point_and_threads(tmp_path):
    env = dict(os.environ, JMX_THREADS="3")
    out = subprocess.run(
        [sys.executable, "-m", "jmatrix1d.cli", "sweep", "--N", "10", "--n-points", "5"],
        env=env, cwd=tmp_path, capture_output=True, text=True,
    )
    assert out.returncode == 0
    env["JMX_THREADS"] = "-2"
    bad = subprocess.run(
        [sys.executable, "-m", "jmatrix1d.cli", "sweep", "--N", "10", "--n-points", "5"],
        env=env, cwd=tmp_path, capture_output=True, text=True,
    )
    assert bad.returncode == 2
    assert "JMX_THREADS" in bad.stderr
