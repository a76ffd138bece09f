import subprocess
import sys

import pytest

from threshold_passage.cli import main


def test_reflect(capsys):
    assert main(["reflect", "--energy", "0", "--rate", "2"]) == 0
    out = capsys.readouterr().out
    p = float(next(l for l in out.splitlines() if l.startswith("P_0_0=")).split("=")[1])
    assert abs(p - 0.381966) < 1e-5


def test_analytic(tmp_path):
    path = tmp_path / "b.csv"
    assert main(["analytic", "--points", "11", "--output", str(path)]) == 0
    text = path.read_text().splitlines()
    assert text[2].startswith("# P_stay=0.3819660112")
    assert len(text) == 3 + 1 + 11


def test_sturmian(tmp_path):
    path = tmp_path / "s.csv"
    assert main(["sturmian", "--channels", "2", "--points", "5", "--output", str(path)]) == 0
    rows = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    assert rows[0].split(",")[:3] == ["omega", "Rerho_0", "Imrho_0"]
    assert len(rows) == 6


def test_tdse(tmp_path, capsys):
    path = tmp_path / "t.csv"
    assert main(["tdse", "--energy", "0", "--output", str(path)]) == 0
    assert "P_0_0=0.38" in capsys.readouterr().out
    assert path.exists()


def test_sweep_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: cli\nshape: zero_range\nmethods: [analytic]\n")
    assert main(["sweep", "--config", str(cfg), "--output", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "cli_manifest.json").exists()


def test_sweep_bad_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("experiment: cli\naxes: {rate: [0]}\n")
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert "axes.rate[0]" in capsys.readouterr().err


def test_preset_dump(capsys):
    assert main(["sweep", "--preset", "fig8", "--dump-config"]) == 0
    assert "experiment: fig8" in capsys.readouterr().out


def test_acceptance_exit_codes():
    ok = subprocess.run([sys.executable, "-m", "threshold_passage.cli", "acceptance", "--only", "9"],
                        capture_output=True, text=True)
    assert ok.returncode == 0 and "[PASS] criterion 9" in ok.stdout
    bad = subprocess.run([sys.executable, "-m", "threshold_passage.cli", "acceptance", "--only", "7"],
                         capture_output=True, text=True)
    assert bad.returncode == 1 and "[FAIL] criterion 7" in bad.stdout


def test_usage_error():
    with pytest.raises(SystemExit):
        main([])
