import subprocess
import sys

import pytest

from bfd_heat.cli import main, read_config
from bfd_heat.errors import ConfigurationError


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "res"
    code = main(["run", "--case", "periodic_1d", "--c", "0,-0.3077", "--n", "8,12,16",
                 "--t-final", "0.1", "--postprocess", "spectral", "--out", str(out)])
    assert code == 0
    assert (out / "convergence.csv").exists() and (out / "periodic_1d.svg").exists()
    text = capsys.readouterr().out
    assert "fitted rate" in text


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study\ncase = periodic_1d\nn = 8,12,16\nc = 0\nt_final = 0.05  # short\n")
    assert read_config(str(cfg))["n"] == "8,12,16"
    assert main(["run", "--config", str(cfg), "--n", "6,8,10"]) == 0
    text = capsys.readouterr().out
    assert "    10 " in text and "    16 " not in text


def test_bad_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("speed = 3\n")
    with pytest.raises(ConfigurationError):
        read_config(str(cfg))
    assert main(["run", "--config", str(cfg)]) == 1
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 1


def test_error_exit_codes():
    assert main(["run"]) == 1
    assert main(["run", "--case", "periodic_1d", "--n", "2,4"]) == 1
    assert main(["run", "--case", "unknown"]) == 1
    assert main([]) == 1


def test_symbol(capsys):
    assert main(["symbol", "--n", "8", "--c", "-0.3077"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "predicted order" in lines[0]
    assert len(lines) == 2 + 8


def test_stability_small_grid(capsys):
    assert main(["stability", "--c-grid", "5"]) == 0
    assert "all certified" in capsys.readouterr().out


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "bfd_heat.cli", "symbol", "--n", "4"], capture_output=True, text=True)
    assert r.returncode == 0 and "omega" in r.stdout
