import json
import subprocess
import sys

import pytest

from stalight import cli, scenarios
from stalight.core import DivergedIntegrationError


def test_presets_list(capsys):
    assert cli.main(["presets", "list"]) == 0
    out = capsys.readouterr().out
    for name in scenarios.SCENARIOS:
        assert name in out


def test_presets_show(capsys):
    assert cli.main(["presets", "show", "bandgap-scan"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc == scenarios.preset_document("bandgap-scan")
    assert cli.main(["presets", "show"]) == 2
    assert cli.main(["presets", "show", "nope"]) == 2


def test_run_from_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(scenarios.preset_document("raman-sl-symmetric")))
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert "leaked_fraction" in capsys.readouterr().out
    assert (tmp_path / "out" / "manifest.json").exists()


@pytest.mark.parametrize(
    "text",
    ['{"grid": {"n_xi": 1}}', "not json", '{"ensemble": {"d": -3}}'],
)
def test_bad_config_exit_code(tmp_path, capsys, text):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(text)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "out")]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_missing_source(tmp_path):
    assert cli.main(["run", "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path)]) == 2


def test_diverged_exit_code(tmp_path, monkeypatch, capsys):
    def boom(cfg, out):
        raise DivergedIntegrationError(1.5)

    monkeypatch.setitem(scenarios.PIPELINES, "slow-light", boom)
    assert cli.main(["run", "--preset", "slow-light", "--out", str(tmp_path)]) == 3
    assert "slow-light" in capsys.readouterr().err


def test_scan(tmp_path):
    assert cli.main(["scan", "--preset", "bandgap-scan", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "spectrum.csv").exists()


def test_sweep(tmp_path, capsys):
    args = ["sweep", "--preset", "hoc-degenerate", "--out", str(tmp_path)]
    args += ["--param", "ensemble.gamma_motion", "--values", "0, 10", "--jobs", "1"]
    assert cli.main(args) == 0
    assert "sweep.csv" in capsys.readouterr().out
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3 and lines[0].startswith("index,value,status,error")


def test_sweep_bad_path(tmp_path):
    args = ["sweep", "--preset", "hoc-degenerate", "--out", str(tmp_path), "--param", "ensemble.x", "--values", "1"]
    assert cli.main(args) == 2


def test_parse_values():
    assert cli._parse_values("1, 2.5, eit") == [1, 2.5, "eit"]
    assert cli._parse_values("  ") == []


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stalight.cli", "presets", "list"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "slow-light" in proc.stdout
    proc = subprocess.run(
        [sys.executable, "-m", "stalight.cli", "run", "--out", str(tmp_path)], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 2
