import json

import numpy as np
import pytest

from deltashock.cli import main
from deltashock.config import GridConfig, RunConfig, SystemConfig, dumps, loads, preset
from deltashock.core import read_snapshot
from deltashock.experiments import analyze_state, run_config, simulate


def small(name="tiny", **kw):
    return RunConfig(name=name, grid=GridConfig(1.0, 64), t_end=0.2, snapshot_times=(0.1,), **kw)


def test_run_config_writes_snapshots_and_manifest(tmp_path):
    res = run_config(small(), tmp_path)
    files = sorted(p.name for p in res.directory.iterdir())
    assert "manifest.json" in files and "config.yaml" in files
    man = json.loads((res.directory / "manifest.json").read_text())
    assert man["steps"] > 0 and man["aborted"] is False and man["snapshots"] == [
        "snap_00000.csv", "snap_00001.csv", "snap_00002.csv"]
    assert man["config"]["grid"]["cells"] == 64 and man["version"]
    assert read_snapshot(res.directory / "snap_00001.csv").time == 0.1
    assert loads((res.directory / "config.yaml").read_text()) == [small()]


def test_env_overrides_output(tmp_path, monkeypatch):
    monkeypatch.setenv("DELTASHOCK_OUT", str(tmp_path / "env"))
    res = run_config(small(), tmp_path / "ignored")
    assert res.directory == tmp_path / "env" / "tiny"


def test_runs_are_bitwise_reproducible(tmp_path):
    cfg = small(irregularization=RunConfig().irregularization.__class__("rational", 1e-4))
    a = run_config(cfg, tmp_path / "a")
    b = run_config(cfg, tmp_path / "b")
    for name in a.manifest["snapshots"]:
        assert (a.directory / name).read_bytes() == (b.directory / name).read_bytes()


def test_system_config_runs(tmp_path):
    cfg = small(name="sys", system=SystemConfig("tans-viscous", 1e-3))
    traj = simulate(cfg)
    assert traj.final.components == 2
    res = run_config(cfg, tmp_path)
    assert read_snapshot(res.directory / "snap_00002.csv").components == 2


def test_aborted_run_is_flagged(tmp_path):
    cfg = small(name="boom", scheme=RunConfig().scheme.__class__(dt=10.0))
    cfg = cfg.replace(initial=cfg.initial.__class__(profile="constant", value=0.0),
                      t_end=100.0, snapshot_times=())
    # a constant state never blows up; use an expression with a huge amplitude instead
    cfg = cfg.replace(initial=cfg.initial.__class__(profile="sin", amplitude=1e160))
    res = run_config(cfg, tmp_path)
    assert res.manifest["aborted"] and res.manifest["abort_reason"]
    last = read_snapshot(res.directory / res.manifest["snapshots"][-1])
    assert np.all(np.isfinite(last.values))


def test_cli_riemann_stationary(capsys):
    assert main(["riemann", "--flux", "hopf", "--left", "1", "--right", "0", "--sigma", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["delta_mass_rate"] == [0.5] and out["speed"] == 0.0


def test_cli_riemann_overdetermined(capsys):
    assert main(["riemann", "--flux", "tans", "--left", "1,1", "--right", "0,1"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["overdetermined"] is True and out["speed"] is None


def test_cli_riemann_no_shock(capsys):
    assert main(["riemann", "--left", "1", "--right", "1"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_preset_and_run(tmp_path, capsys):
    path = tmp_path / "p.yaml"
    assert main(["preset", "fig2", "-o", str(path)]) == 0
    assert loads(path.read_text()) == preset("fig2")
    path.write_text(dumps(small()))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 0
    snap = tmp_path / "o" / "tiny" / "snap_00002.csv"
    assert snap.exists()
    capsys.readouterr()
    assert main(["analyze", "--snapshot", str(snap)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["spike"] is None and len(rep["zero_crossings"]) == 2


def test_cli_bad_config(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("schema: 1\ngrid:\n  cells: -5\n")
    assert main(["run", "--config", str(path)]) == 2
    err = capsys.readouterr().err
    assert "line 3" in err and "grid.cells" in err


def test_cli_asymptotic(tmp_path, capsys):
    cfg = preset("fig3")[0].replace(grid=GridConfig(1.0, 1000))
    path = tmp_path / "f3.yaml"
    path.write_text(dumps(cfg))
    assert main(["asymptotic", "--config", str(path), "--t", "0.3", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["profile"]["slope_b"] > 0
    overlay = (tmp_path / "fig3" / "overlay_t0.3.csv").read_text().splitlines()
    assert overlay[0] == "x,u_asymptotic,u_linear" and len(overlay) == 1001


def test_cli_converge_small(tmp_path, capsys):
    cfg = preset("fig4")[0].replace(grid=GridConfig(1.0, 200), t_end=0.4)
    cfg = cfg.replace(irregularization=cfg.irregularization.__class__("rational", 6.25e-5))
    path = tmp_path / "f4.yaml"
    path.write_text(dumps(cfg))
    assert main(["converge", "--config", str(path), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "fig4" / "convergence.csv").read_text().splitlines()
    assert lines[0] == "level,dx,epsilon,width,peak_pos,peak_neg,net_mass,location" and len(lines) == 4
    summary = json.loads((tmp_path / "fig4" / "convergence_summary.json").read_text())
    assert summary["aborted"] == [False, False, False] and len(summary["width_ratios"]) == 2


def test_analyze_state_reports_spike():
    from deltashock.core import make_grid, sample
    s = sample(lambda x: np.sin(2 * np.pi * x) + 30 * (np.abs(x - 0.5) < 0.003), make_grid(1.0, 1000))
    out = analyze_state(s)
    assert out["spike"]["location"] == pytest.approx(0.5, abs=0.005)
