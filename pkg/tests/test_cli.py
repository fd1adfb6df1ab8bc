import json

import pytest

from luderscope import cli, qobjects


def _write(path, priors, povms):
    path.write_text(json.dumps(qobjects.ensemble_to_json(priors, povms)))
    return str(path)


def test_discriminate_zx_instrument(tmp_path, capsys):
    path = _write(tmp_path / "zx.json", [0.5, 0.5], [qobjects.z_povm(), qobjects.x_povm()])
    assert cli.main(["discriminate", "--input", path, "--mode", "instrument"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["success"] == pytest.approx(0.933013, abs=1e-6)
    assert out["distance"] == pytest.approx(3**0.5, abs=1e-6)
    assert out["tester"]["ok"] and all(c["valid"] for c in out["choi"])
    assert out["sdp"]["status"] == "optimal"


def test_discriminate_priors_override(tmp_path, capsys):
    path = _write(tmp_path / "zx.json", [0.5, 0.5], [qobjects.z_povm(), qobjects.x_povm()])
    assert cli.main(["discriminate", "--input", path, "--mode", "measurement", "--priors", "1,0"]) == 0
    assert json.loads(capsys.readouterr().out)["success"] == pytest.approx(1.0, abs=1e-7)
    assert cli.main(["discriminate", "--input", path, "--mode", "measurement", "--priors", "1"]) == 1


def test_discriminate_single_povm(tmp_path, capsys):
    path = _write(tmp_path / "one.json", [1.0], [qobjects.z_povm()])
    assert cli.main(["discriminate", "--input", path, "--mode", "instrument"]) == 0
    assert json.loads(capsys.readouterr().out)["success"] == pytest.approx(1.0, abs=1e-7)


def test_discriminate_malformed_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    assert cli.main(["discriminate", "--input", str(path), "--mode", "instrument"]) == 1
    path.write_text('{"dim": 2}')
    assert cli.main(["discriminate", "--input", str(path), "--mode", "instrument"]) == 1


def test_discriminate_invalid_povm_reports(tmp_path, capsys):
    obj = qobjects.ensemble_to_json([0.5, 0.5], [qobjects.z_povm(), qobjects.x_povm()])
    obj["povms"][1][0][0][0] = [0.7, 0.0]
    path = tmp_path / "inc.json"
    path.write_text(json.dumps(obj))
    assert cli.main(["discriminate", "--input", str(path), "--mode", "measurement"]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["report"]["completeness_residual"] == pytest.approx(0.2)


def test_scan_writes_table(tmp_path, capsys):
    out = tmp_path / "t.csv"
    args = ["scan-trine", "--grid", "2", "--theta", "0:1", "--phi", "0:1", "--out", str(out)]
    assert cli.main(args) == 0
    assert len(out.read_text().splitlines()) == 5


def test_scan_noisy_json(tmp_path):
    out = tmp_path / "n.json"
    assert cli.main(["scan-noisy", "--grid", "2", "--p", "0:0.5", "--out", str(out), "--format", "json"]) == 0
    rows = json.loads(out.read_text())
    assert len(rows) == 4 and "locc_lower" in rows[0]


def test_scan_bad_inputs(tmp_path, capsys):
    assert cli.main(["scan-noisy", "--grid", "2", "--p", "0:2", "--out", str(tmp_path / "x.csv")]) == 1
    assert cli.main(["scan-trine", "--grid", "2", "--out", str(tmp_path / "missing" / "x.csv")]) == 1
    with pytest.raises(SystemExit):
        cli.main(["scan-trine", "--theta", "abc", "--out", "x.csv"])


def test_advantage_curve(capsys):
    assert cli.main(["advantage", "--family", "noisy", "--theta", "0", "--p", "0.25:0.25:1"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("p,") and lines[1].split(",")[3].startswith("1.3333")
