import json

import numpy as np
import pytest

from luderscope import closed_form, scan
from luderscope.scan import ScanConfig, run_scan, run_scan_noisy, run_scan_trine


def test_config_validation():
    with pytest.raises(ValueError):
        ScanConfig("trine", grid_n=1)
    with pytest.raises(ValueError):
        ScanConfig("trine", theta_range=(1.0, 1.0))
    with pytest.raises(ValueError):
        ScanConfig("noisy", second_axis_range=(0.0, 1.5))
    with pytest.raises(ValueError):
        ScanConfig("circle")


def test_axes_half_open_theta():
    theta, phi = ScanConfig("trine", grid_n=4).axes()
    assert np.allclose(theta, [0, np.pi / 2, np.pi, 3 * np.pi / 2])
    assert phi[0] == 0 and phi[-1] == pytest.approx(np.pi)


def test_trine_origin_and_order():
    cfg = ScanConfig("trine", grid_n=2, theta_range=(0.0, 1.0), second_axis_range=(0.0, 1.0))
    rows = run_scan_trine(cfg, workers=1)
    assert [(r.axis1, r.axis2) for r in rows] == [(0.0, 0.0), (0.0, 1.0), (0.5, 0.0), (0.5, 1.0)]
    assert rows[0].p_meas == pytest.approx(0.5, abs=1e-6) and rows[0].p_inst == pytest.approx(0.5, abs=1e-6)
    assert rows[0].advantage is None
    assert not scan.row_violations(rows) and not any(r.flag for r in rows)


def test_noisy_theta_zero_column():
    cfg = ScanConfig("noisy", grid_n=3, theta_range=(0.0, 0.3))
    rows = run_scan_noisy(cfg, workers=1)
    for row in rows[:3]:
        p = row.axis2
        assert row.p_meas == pytest.approx(0.5 + p / 2, abs=1e-6)
        assert row.p_meas_analytic == pytest.approx(0.5 + p / 2)
        assert row.p_inst == pytest.approx(closed_form.noisy_z_sequential_optimum(p), abs=1e-6)
        assert row.locc_lower == pytest.approx(row.p_inst, abs=1e-6)
    assert rows[0].p_inst == pytest.approx(0.5, abs=1e-6)
    assert all(r.p_meas_analytic is None for r in rows[3:])


def test_parallel_matches_serial():
    cfg = ScanConfig("trine", grid_n=2, theta_range=(0.2, 2.0), second_axis_range=(0.3, 1.3))
    serial = run_scan(cfg, workers=1)
    parallel = run_scan(cfg, workers=2)
    for a, b in zip(serial, parallel):
        assert (a.axis1, a.axis2) == (b.axis1, b.axis2)
        assert abs(a.p_meas - b.p_meas) <= 1e-9 and abs(a.p_inst - b.p_inst) <= 1e-9


def test_row_violations_detects_inversion():
    good = scan.ScanRow(0.0, 0.0, 0.6, 0.7)
    bad = scan.ScanRow(0.0, 0.0, 0.7, 0.6)
    low = scan.ScanRow(0.0, 0.0, 0.4, 0.6)
    assert scan.row_violations([good, bad, low]) == [bad, low]


def _small_rows():
    cfg = ScanConfig("trine", grid_n=2, theta_range=(0.0, 2.0), second_axis_range=(0.0, 1.0))
    return cfg, run_scan(cfg, workers=1)


def test_csv_output_deterministic(tmp_path):
    cfg, rows = _small_rows()
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    scan.write_csv(rows, a, "trine")
    scan.write_csv(run_scan(cfg, workers=1), b, "trine")
    data = a.read_bytes()
    assert data == b.read_bytes()
    lines = data.decode().split("\n")
    assert lines[0] == "axis1,axis2,p_meas,p_inst,advantage,gap_meas,gap_inst"
    assert len([x for x in lines if x]) == 5 and b"\r" not in data
    assert lines[1].split(",")[4] == ""


def test_noisy_csv_has_extra_columns(tmp_path):
    rows = run_scan(ScanConfig("noisy", grid_n=2), workers=1)
    path = tmp_path / "n.csv"
    scan.write_csv(rows, path, "noisy")
    assert path.read_text().splitlines()[0].endswith(",p_meas_analytic,locc_lower")


def test_json_output(tmp_path):
    _, rows = _small_rows()
    path = tmp_path / "r.json"
    scan.write_json(rows, path, "trine")
    data = json.loads(path.read_text())
    assert len(data) == 4 and set(data[0]) == set(scan.CSV_FIELDS)
    assert data[0]["advantage"] is None


def test_heatmaps_one_per_metric(tmp_path):
    cfg, rows = _small_rows()
    cfg.output_path = str(tmp_path / "grid.csv")
    cfg.emit_heatmap = True
    written = scan.write_outputs(rows, cfg)
    svgs = sorted(p.name for p in written if p.suffix == ".svg")
    assert svgs == ["grid_advantage.svg", "grid_p_inst.svg", "grid_p_meas.svg"]
    first = (tmp_path / "grid_p_meas.svg").read_bytes()
    scan.write_outputs(rows, cfg)
    assert (tmp_path / "grid_p_meas.svg").read_bytes() == first


def test_default_spacing():
    trine = ScanConfig("trine")
    assert scan.default_spacing(trine, "p_meas") == 0.002
    assert scan.default_spacing(trine, "advantage") == 0.00165
    assert scan.default_spacing(ScanConfig("trine", level_spacing=0.01), "p_inst") == 0.01


def test_worker_count_env(monkeypatch):
    monkeypatch.setenv("LUDERSCOPE_THREADS", "1")
    assert scan.worker_count() == 1


def test_advantage_curve():
    out = scan.advantage_curve(0.0, [0.25], workers=1)
    assert out[0]["advantage"] == pytest.approx(4 / 3, abs=1e-5)
    assert out[0]["sequential_advantage"] == pytest.approx(4 / 3, abs=1e-8)
