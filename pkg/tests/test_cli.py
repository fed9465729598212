import json
import subprocess
import sys

import pytest

from helpers import FIXTURES
from unitforge.balancelab import CSV_NAME, MATRIX_NAME
from unitforge.cli import main


@pytest.fixture
def tiny_config(tmp_path):
    path = tmp_path / "study.json"
    path.write_text(json.dumps({"engine": {"maxTicks": 300}, "iterationScale": 0.01}))
    return str(path)


def test_validate_fixture():
    assert main(["validate", str(FIXTURES / "revenger.json")]) == 0


def test_validate_reports_field_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"cost": 1, "hp": 0, "damage": 1, "range": 1, "moveTime": 1, "attackTime": 1,
                               "cause": 1, "effect": 1}))
    assert main(["validate", str(bad)]) == 1
    assert "hp" in capsys.readouterr().err


def test_missing_file_is_an_error(tmp_path):
    assert main(["validate", str(tmp_path / "nope.json")]) == 1
    assert main(["evaluate", "--unit", str(tmp_path / "nope.json")]) == 1


@pytest.mark.parametrize("argv", [["frobnicate"], ["validate", "--bogus", "x"], [], ["study", "--units-dir", "x"]])
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2


def test_console_entry_point_usage_error():
    r = subprocess.run([sys.executable, "-m", "unitforge.cli", "frobnicate"], capture_output=True, text=True)
    assert r.returncode == 2
    assert "usage:" in r.stderr


def test_evaluate_twice_gives_identical_reports(tmp_path, tiny_config):
    outs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        argv = ["evaluate", "--unit", str(FIXTURES / "phoenix.json"), "--seed", "7", "--games-per-round", "2",
                "--config", tiny_config, "--out", str(out)]
        assert main(argv) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert json.loads(outs[0])["genome"] == "c2-h1-d3-r1-m15-a3-C1-E1"


def test_evaluate_default_output_name(tmp_path, tiny_config, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = ["evaluate", "--unit", str(FIXTURES / "hunter.json"), "--games-per-round", "1", "--config", tiny_config]
    assert main(argv) == 0
    assert (tmp_path / "hunter.fitness.json").exists()


def test_generate_writes_unit_and_trace(tmp_path, tiny_config):
    out = tmp_path / "gen" / "unit.json"
    argv = ["generate", "--seed", "1", "--games-per-round", "1", "--max-iterations", "1",
            "--config", tiny_config, "--out", str(out)]
    assert main(argv) == 0
    assert main(["validate", str(out)]) == 0
    trace = json.loads((tmp_path / "gen" / "unit.trace.json").read_text())
    assert trace["capHit"] in (True, False) and len(trace["iterations"]) == 1


def test_matchup(tmp_path, tiny_config, capsys):
    out = tmp_path / "m.json"
    argv = ["matchup", "--unit", str(FIXTURES / "statue.json"), "--p1", "weak", "--p2", "strong",
            "--mode", "exclusive", "--games", "2", "--config", tiny_config, "--out", str(out)]
    assert main(argv) == 0
    cells = json.loads(out.read_text())
    assert cells[0]["games"] == 2 and cells[0]["p2_made"] == 0
    assert "weak vs strong (exclusive)" in capsys.readouterr().out


def test_study_smoke(tmp_path, tiny_config):
    units = tmp_path / "units"
    units.mkdir()
    for name in ("revenger", "chopper"):
        (units / f"{name}.json").write_text((FIXTURES / f"{name}.json").read_text())
    out = tmp_path / "out"
    argv = ["study", "--units-dir", str(units), "--out-dir", str(out), "--games", "1", "--redo-threshold", "0.5",
            "--skills", "weak,medium", "--config", tiny_config, "--event-logs"]
    assert main(argv) == 0
    assert (out / CSV_NAME).exists() and (out / MATRIX_NAME).exists()
    assert len((out / CSV_NAME).read_text().splitlines()) == 1 + 2 * 4 * 2
    assert len(list((out / "events").glob("*.jsonl"))) >= 16


def test_study_rejects_empty_dir_and_bad_skills(tmp_path):
    assert main(["study", "--units-dir", str(tmp_path), "--out-dir", str(tmp_path / "o")]) == 2
    assert main(["study", "--units-dir", str(FIXTURES), "--out-dir", str(tmp_path / "o"), "--skills", "godlike"]) == 2


def test_simulate_dumps_event_log(tmp_path, tiny_config):
    out = tmp_path / "events.jsonl"
    argv = ["simulate", "--unit", str(FIXTURES / "lawman.json"), "--p1", "rush", "--p2", "weak", "--seed", "2",
            "--config", tiny_config, "--out", str(out)]
    assert main(argv) == 0
    lines = [json.loads(x) for x in out.read_text().splitlines()]
    assert lines[-1]["event"] == "end"
    assert all(set(x) == {"tick", "event", "units", "payload"} for x in lines)


def test_simulate_to_stdout(capsys, tiny_config):
    assert main(["simulate", "--p1", "idle", "--p2", "rush", "--config", tiny_config]) == 0
    captured = capsys.readouterr()
    assert captured.out.strip().splitlines()[-1].startswith("{")
    assert "player 1 wins" in captured.err
