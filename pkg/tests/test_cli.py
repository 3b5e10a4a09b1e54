import json
from pathlib import Path

import pytest

from saddlescar import cli
from saddlescar.config import load_config
from saddlescar.errors import ConfigError

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _run(*argv):
    return cli.run_command(list(argv))


def test_help_lists_commands(capsys):
    assert _run("--help") == 0
    text = capsys.readouterr().out
    for name in cli.COMMANDS:
        assert name in text
    assert len(cli.COMMANDS) == 9


def test_unknown_command_is_usage_error():
    assert _run("bogus") == 2


def test_negative_mass_writes_nothing(tmp_path):
    out = tmp_path / "o"
    assert _run("fig1", "--config", str(CONFIGS / "mathieu.cfg"), "--out", str(out),
                "--override", "physics.masses=-1") == 2
    assert not out.exists()


def test_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("[potential]\nid = cosine\ncolour = blue\n")
    with pytest.raises(ConfigError):
        load_config(cfg)
    assert _run("fig1", "--config", str(cfg), "--out", str(tmp_path / "o")) == 2
    with pytest.raises(ConfigError):
        load_config(None, ["solver.nope=1"])
    with pytest.raises(ConfigError):
        load_config(None, ["solver.K=8"])
    with pytest.raises(ConfigError):
        load_config(None, ["solver.K=abc"])


def test_json_config(tmp_path):
    cfg = tmp_path / "m.json"
    cfg.write_text(json.dumps({"potential": {"id": "cosine", "g": 50}, "physics": {"masses": [0.5]}}))
    c = load_config(cfg)
    assert c.get("potential", "g") == 50.0 and c.get("physics", "masses") == [0.5]
    assert c.digest() != load_config(cfg, ["potential.g=49"]).digest()
    assert c.digest() == load_config(cfg, ["output.directory=elsewhere"]).digest()


def test_fig1_command(tmp_path, capsys):
    out = tmp_path / "fig1"
    assert _run("fig1", "--config", str(CONFIGS / "mathieu.cfg"), "--out", str(out)) == 0
    text = capsys.readouterr().out
    assert "selected E=101.18897" in text
    rows = (out / "fig1.csv").read_text().splitlines()
    assert rows[0] == "x,exact_density,semiclassical_density"
    man = json.loads((out / "manifest.json").read_text())
    entry = next(f for f in man["files"] if f["name"] == "fig1.csv")
    summary = json.loads((out / "fig1_summary.json").read_text())
    assert entry["rows"] == len(rows) - 1 == summary["rows"]
    # every row sits in the clamp region of the configured grid
    xs = [float(r.split(",")[0]) for r in rows[1:]]
    assert max(abs(x) for x in xs) <= summary["first_node"]
    assert abs(summary["energy"] - 101.189) < 0.05


def test_twelve_significant_digits(tmp_path):
    out = tmp_path / "c"
    assert _run("coulomb-saddle", "--config", str(CONFIGS / "coulomb.cfg"), "--out", str(out), "--quiet") == 0
    for line in (out / "coulomb_saddle.csv").read_text().splitlines()[1:]:
        for cell in line.split(",")[1:]:
            mant = cell.split("e")[0].lstrip("-").replace(".", "").lstrip("0")
            assert len(mant) <= 12


@pytest.mark.parametrize("command,config", [
    ("critical-points", "saddle.cfg"),
    ("monodromy", "saddle.cfg"),
    ("scar-predict", "saddle.cfg"),
    ("scar-predict", "mathieu.cfg"),
    ("solve1d", "mathieu.cfg"),
    ("solve2d", "saddle.cfg"),
    ("detect-scars", "saddle.cfg"),
    ("coulomb-saddle", "coulomb.cfg"),
])
def test_commands_run(tmp_path, command, config):
    out = tmp_path / "o"
    assert _run(command, "--config", str(CONFIGS / config), "--out", str(out), "--quiet") == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == command and man["files"]
    for f in man["files"]:
        assert (out / f["name"]).exists()


def test_dimension_mismatch_is_config_error(tmp_path):
    assert _run("solve2d", "--config", str(CONFIGS / "mathieu.cfg"), "--out", str(tmp_path / "o")) == 2


def test_numeric_failure_exit_one(tmp_path):
    # a minimum is not a saddle; a record too short for three resurgences
    assert _run("monodromy", "--override", "potential.sigmas=1,2", "--out", str(tmp_path / "o")) == 1
    assert _run("wavepacket", "--config", str(CONFIGS / "heller.cfg"), "--out", str(tmp_path / "w"),
                "--override", "solver.steps=50", "--quiet") == 1
    assert not (tmp_path / "w").exists()


def test_empty_result_manifest(tmp_path):
    from saddlescar import io

    man = io.emit_outputs([], tmp_path / "e", "abc", "none")
    assert man["files"] == [] and (tmp_path / "e" / "manifest.json").exists()
