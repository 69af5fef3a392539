import json
import math

import pytest

from abpstab import cli
from abpstab.io import ConfigError, parse_list, read_config, read_csv, write_csv, write_json


def test_parse_list_forms():
    assert parse_list("1, 2.5,1e-2") == [1.0, 2.5, 0.01]
    assert parse_list("linspace(0, 1, 3)") == [0.0, 0.5, 1.0]
    assert parse_list("logspace(-2, 0, 3)") == pytest.approx([0.01, 0.1, 1.0])
    assert parse_list("1/pi, 1/(4*pi)") == pytest.approx([1 / math.pi, 1 / (4 * math.pi)])
    with pytest.raises(ConfigError):
        parse_list("__import__('os')")
    with pytest.raises(ConfigError):
        parse_list("linspace(0, 1)")


def test_read_config_values():
    cfg = read_config(text="[run]\nexperiment = growth-rate\nmodel = b\n[grid]\nzeta = 1/pi\n"
                           "[numerics]\nN_modes = 48\ndt_time = 0.02\n")
    assert cfg.model == "B" and cfg.grid("zeta") == pytest.approx([1 / math.pi])
    assert cfg.num("N_modes") == 48 and cfg.num("T_time") == 50.0
    assert cfg.echo()["numerics"]["N_modes"] == "48"


@pytest.mark.parametrize("text", [
    "[run]\nexperiment = x\nmodel = C\n",
    "[run]\nexperiment = x\n[grid]\nnu =\n",
    "[run]\nexperiment = x\n[numerics]\ndt_time = -1\n",
    "[run]\nexperiment = x\n[numerics]\nN_modes = many\n",
    "not an ini file",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        read_config(text=text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config(tmp_path / "nope.ini")


def test_csv_json_deterministic(tmp_path):
    rows = [[1, 0.1, True, "a"], [2, float("nan"), False, "b"]]
    write_csv(tmp_path / "a.csv", ["i", "x", "flag", "s"], rows)
    header, back = read_csv(tmp_path / "a.csv")
    assert header == ["i", "x", "flag", "s"] and back[0] == ["1", "0.1", "true", "a"]
    write_json(tmp_path / "a.json", {"b": 1j, "a": [1.5]})
    assert json.loads((tmp_path / "a.json").read_text()) == {"a": [1.5], "b": [0.0, 1.0]}


def _write(tmp_path, text):
    p = tmp_path / "run.ini"
    p.write_text(text)
    return str(p)


def test_cli_roots_deterministic_across_jobs(tmp_path, capsys):
    cfg = _write(tmp_path, "[grid]\nzeta = 1/pi, 0.2, 1/(4*pi)\nnu = 0, 0.01\n[numerics]\nN_modes = 64\n")
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli.main(["dispersion-roots", "--config", cfg, "--out", str(a), "--jobs", "1"]) == 0
    assert cli.main(["dispersion-roots", "--config", cfg, "--out", str(b), "--jobs", "2"]) == 0
    assert (a / "dispersion_roots.csv").read_text() == (b / "dispersion_roots.csv").read_text()
    manifest = json.loads((a / "manifest.json").read_text())
    assert manifest["n_tasks"] == 6 and manifest["success"]
    assert "success: 6 tasks" in capsys.readouterr().out


def test_cli_stability_diagram(tmp_path):
    cfg = _write(tmp_path, "[law]\nkind = affine\n[grid]\nphi = 0.2, 0.5, 0.8\nnu = 0\n[numerics]\nN_modes = 32\n")
    out = tmp_path / "o"
    assert cli.main(["stability-diagram", "--config", cfg, "--out", str(out), "--jobs", "1"]) == 0
    header, rows = read_csv(out / "stability_diagram.csv")
    assert len(rows) == 3 and "unstable_mode" in header


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["growth-rate", "--config", str(tmp_path / "missing.ini"), "--out", str(tmp_path)]) == 2
    bad = _write(tmp_path, "[grid]\nzeta =\n")
    assert cli.main(["growth-rate", "--config", bad, "--out", str(tmp_path)]) == 2
    assert cli.main(["growth-rate", "--jobs", "0", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit):
        cli.main(["no-such-command"])
    assert "error" in capsys.readouterr().err


def test_cli_records_truncation_warning(tmp_path):
    cfg = _write(tmp_path, "[verify]\nchecks = 12\n[numerics]\nN_modes = 8\n")
    out = tmp_path / "v"
    cli.main(["verify", "--config", cfg, "--out", str(out), "--jobs", "1"])
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_tasks"] == 2
    assert any(t["warnings"] for t in manifest["tasks"])
