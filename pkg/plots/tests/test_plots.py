import subprocess
import sys

import numpy as np
import pytest

from elhplots.cli import main
from elhplots.figures import FigureSpec, plot_energy, plot_order
from elhplots.readers import FormatError, read_snapshot, read_timeseries


def run_sim(tmp_path, name, dt, t_end, preset="damped_default", n=32,
            snapshots=False, eta="auto"):
    csv = tmp_path / f"{name}.csv"
    snap_prefix = tmp_path / f"{name}_snap"
    snap_block = (
        f"snapshots = {snap_prefix}\nsnapshot_every = 0\n" if snapshots else ""
    )
    cfg = tmp_path / f"{name}.cfg"
    cfg.write_text(f"""
[grid]
dim = 2
n = {n}

[coefficients]
preset = {preset}

[solver]
dt = {dt}

[initial]
amplitude = 0.05
seed = 3

[diagnostics]
eta = {eta}
sample_every = 1

[output]
csv = {csv}
{snap_block}
[run]
t_end = {t_end}
""")
    proc = subprocess.run(
        [sys.executable, "-m", "elhsim.cli", "simulate", str(cfg)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    return csv, snap_prefix


@pytest.fixture(scope="module")
def artifacts(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("plot_artifacts")
    csv, snap = run_sim(tmp, "base", dt=1e-3, t_end=0.1, snapshots=True)
    return {"tmp": tmp, "csv": csv, "snap_prefix": snap}


@pytest.fixture(scope="module")
def order_csvs(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("order_artifacts")
    paths = []
    for i, dt in enumerate((1e-3, 5e-4, 2.5e-4)):
        csv, _ = run_sim(tmp, f"dt{i}", dt=dt, t_end=0.2)
        paths.append(str(csv))
    return paths


def test_reader_round_trip_and_meta(artifacts):
    ts = read_timeseries(str(artifacts["csv"]))
    assert ts.meta["rng"] == "philox4x64-10"
    assert ts.meta["outcome"] == "completed"
    assert ts["t"].size == 101
    assert np.isfinite(ts["E_basic"]).all()
    # the first residual entry is an empty field
    assert np.isnan(ts["residual"][0])


def test_energy_plot_succeeds_and_run_is_resolved(artifacts):
    ts = read_timeseries(str(artifacts["csv"]))
    res = ts["residual"]
    assert np.nanmax(res) <= 1e-4  # numeric check backing the figure
    out = artifacts["tmp"] / "energy.png"
    assert main(["energy", str(artifacts["csv"]), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_drift_plot_succeeds_and_drift_is_bounded(artifacts):
    ts = read_timeseries(str(artifacts["csv"]))
    assert float(np.max(ts["h_max"])) <= 1e-6
    out = artifacts["tmp"] / "drift.png"
    assert main(["drift", str(artifacts["csv"]), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_order_plot_reports_fourth_order(order_csvs, tmp_path, capsys):
    out = tmp_path / "order.png"
    assert main(["order", *order_csvs, "-o", str(out)]) == 0
    printed = capsys.readouterr().out
    slope = float(printed.split()[-1])
    assert 3.7 <= slope <= 4.3
    assert out.stat().st_size > 0


def test_order_plot_needs_two_inputs(order_csvs, tmp_path):
    out = tmp_path / "order1.png"
    assert main(["order", order_csvs[0], "-o", str(out)]) == 1


def test_snapshot_plot(artifacts, tmp_path):
    snap = f"{artifacts['snap_prefix']}_00000100.snap"
    meta = read_snapshot(snap)
    assert meta.dim == 2 and meta.n == 32
    assert meta.time == pytest.approx(0.1)
    out = tmp_path / "snap.png"
    assert main(["snapshot", snap, "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_snapshot_uniform_director_quiver(tmp_path):
    # amplitude-0 initial data: uniform director field snapshot
    csv = tmp_path / "flat.csv"
    cfg = tmp_path / "flat.cfg"
    snap_prefix = tmp_path / "flat_snap"
    cfg.write_text(f"""
[grid]
dim = 2
n = 16

[coefficients]
preset = wave_map

[solver]
dt = 0.001

[initial]
amplitude = 0.0
seed = 1

[output]
csv = {csv}
snapshots = {snap_prefix}

[run]
t_end = 0.002
""")
    proc = subprocess.run(
        [sys.executable, "-m", "elhsim.cli", "simulate", str(cfg)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    snap = read_snapshot(f"{snap_prefix}_00000000.snap")
    assert np.allclose(snap.d[1], 1.0)
    assert np.max(np.abs(snap.d[0])) < 1e-12
    out = tmp_path / "flat.png"
    assert main(["snapshot", f"{snap_prefix}_00000000.snap", "-o", str(out)]) == 0


def test_empty_run_plot(tmp_path):
    csv = tmp_path / "empty.csv"
    header = ("t,E_basic,D_total,D_visc,D_mu1,D_lam1,D_cross,D_mu56,"
              "E_hs,D_hs,E_eta,D_eta,h_max,h_l2,tangency_max,residual")
    csv.write_text(f"# format = elh-timeseries v1\n{header}\n")
    out = tmp_path / "empty.png"
    assert main(["energy", str(csv), "-o", str(out)]) == 0
    assert out.stat().st_size > 0


def test_schema_mismatch_names_missing_column(tmp_path):
    csv = tmp_path / "bad.csv"
    csv.write_text("t,E_basic\n0.0,1.0\n")
    with pytest.raises(FormatError, match="D_total"):
        read_timeseries(str(csv))
    out = tmp_path / "bad.png"
    assert main(["energy", str(csv), "-o", str(out)]) == 1


def test_figure_spec_validation_and_dispatch(artifacts, tmp_path):
    with pytest.raises(ValueError, match="kind"):
        FigureSpec(["x.csv"], "pie", "out.png")
    with pytest.raises(ValueError, match="yscale"):
        FigureSpec(["x.csv"], "energy", "out.png", yscale="cubic")
    with pytest.raises(ValueError, match="input"):
        FigureSpec([], "energy", "out.png")
    out = tmp_path / "spec.png"
    spec = FigureSpec([str(artifacts["csv"])], "drift", str(out), yscale="log")
    assert spec.render() is None
    assert out.stat().st_size > 0


def test_figures_are_deterministic(artifacts, tmp_path):
    a = tmp_path / "a.png"
    b = tmp_path / "b.png"
    plot_energy(str(artifacts["csv"]), str(a))
    plot_energy(str(artifacts["csv"]), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_order_plot_is_pure_function_of_inputs(order_csvs, tmp_path):
    a = tmp_path / "oa.png"
    b = tmp_path / "ob.png"
    s1 = plot_order(order_csvs, str(a))
    s2 = plot_order(order_csvs, str(b))
    assert s1 == s2
    assert a.read_bytes() == b.read_bytes()


def test_criterion_10_plot_pipeline(order_csvs, tmp_path_factory, capsys):
    # the reference damped run (n=64, dt=1e-3, t in [0,1]) feeds the energy
    # and drift figures; the order fit runs over dt in {1e-3, 5e-4, 2.5e-4}
    tmp = tmp_path_factory.mktemp("crit10")
    csv, _ = run_sim(tmp, "reference", dt=1e-3, t_end=1.0, n=64)
    ok_energy = main(["energy", str(csv), "-o", str(tmp / "energy.png")]) == 0
    ok_drift = main(["drift", str(csv), "-o", str(tmp / "drift.png")]) == 0
    assert main(["order", *order_csvs, "-o", str(tmp / "order.png")]) == 0
    slope = float(capsys.readouterr().out.split()[-1])
    ok_slope = 3.7 <= slope <= 4.3
    ok = ok_energy and ok_drift and ok_slope
    print(f"ACCEPTANCE 10 plot pipeline: {'PASS' if ok else 'FAIL'} "
          f"(energy={ok_energy}, drift={ok_drift}, order slope={slope:.2f})")
    assert ok
