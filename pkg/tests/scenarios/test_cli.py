from __future__ import annotations

import csv
import io
import json
import logging
from pathlib import Path

import pytest

import sdstab
from sdstab.cli import main
from sdstab.scenarios.config import CONFIG_ENV_VAR


def _rows(text: str) -> dict[str, str]:
    rows = {}
    for line in text.splitlines():
        parts = line.split()
        if len(parts) >= 2:
            rows[parts[0]] = parts[1]
    return rows


def test_bracket_prints_witness_at_singular_state(capsys) -> None:
    code = main(["bracket", "example1", "--point", "1,-1"])

    rows = _rows(capsys.readouterr().out)
    assert code == 0
    assert float(rows["[f,g]Phi"]) == pytest.approx(-2.0, abs=1e-6)
    assert float(rows["fPhi"]) == pytest.approx(0.0, abs=1e-12)
    assert [float(v) for v in rows["[f,g]"].split(";")] == pytest.approx([4.0, 6.0], abs=1e-6)


def test_bracket_csv_output(capsys) -> None:
    main(["bracket", "example1", "--point", "2,1", "--csv"])

    reader = csv.reader(io.StringIO(capsys.readouterr().out))
    rows = {row[0]: row[1] for row in reader}
    assert float(rows["gPhi"]) == pytest.approx(3.0)
    assert float(rows["fPhi"]) == pytest.approx(-33.0)


def test_bracket_rejects_wrong_point_dimension(capsys) -> None:
    assert main(["bracket", "example1", "--point", "1,2,3"]) == 3
    assert "error:" in capsys.readouterr().err


def test_check_clf_passes_on_example1(capsys) -> None:
    code = main(["check-clf", "example1", "--grid-annulus", "0.2:3:100"])

    out = capsys.readouterr().out
    assert code == 0
    assert "points checked: 100" in out
    assert out.strip().endswith("0 violations")


def test_check_clf_reports_violations_with_exit_code_one(tmp_path, capsys) -> None:
    config = tmp_path / "bad.json"
    config.write_text(
        json.dumps({"scenario": "custom", "x0": [1, 0], "system": {"f": ["x1", "x2"], "g": ["0", "0"]}}),
        encoding="utf-8",
    )

    code = main(["check-clf", "--config", str(config), "--grid-annulus", "0.5:1:10"])

    assert code == 1
    assert "10 violations" in capsys.readouterr().out


def test_check_gains_passes_on_example2(capsys) -> None:
    code = main(["check-gains", "example2"])

    rows = _rows(capsys.readouterr().out)
    assert code == 0
    assert rows["small_gain"] == "50"
    assert rows["rank"] == "100"


def test_check_gains_needs_composite_scenario(capsys) -> None:
    assert main(["check-gains", "example1"]) == 3
    assert "composite" in capsys.readouterr().err


def test_simulate_writes_artifacts(tmp_path, monkeypatch, capsys) -> None:
    out = tmp_path / "runs"
    monkeypatch.setenv(CONFIG_ENV_VAR, json.dumps({"scenario": "example1", "x0": [0.5, 0.5]}))

    code = main(["simulate", "example1", "--out", str(out), "--csv"])

    rows = {row[0]: row[1] for row in csv.reader(io.StringIO(capsys.readouterr().out))}
    assert code == 0
    assert rows["verdict"] == "Converged"
    assert (out / "ledger.csv").exists()


def test_simulate_uses_environment_payload(tmp_path, monkeypatch, capsys) -> None:
    monkeypatch.setenv(
        CONFIG_ENV_VAR,
        json.dumps({"scenario": "example1", "stop_phi": 1e-12, "max_events": 1, "output_dir": str(tmp_path / "env")}),
    )

    assert main(["simulate"]) == 2
    assert (tmp_path / "env" / "summary.txt").exists()
    assert main(["simulate", "example2"]) == 3
    assert "scenario" in capsys.readouterr().err


def test_simulate_batch_runs_each_config(tmp_path, capsys) -> None:
    paths = []
    for name in ("one", "two"):
        path = tmp_path / f"{name}.json"
        path.write_text(
            json.dumps({"scenario": "example1", "x0": [0.5, 0.5], "stop_phi": 1e-2, "output_dir": str(tmp_path / name)}),
            encoding="utf-8",
        )
        paths.append(str(path))

    code = main(["simulate", "--batch", *paths, "--workers", "2", "--csv"])

    rows = list(csv.reader(io.StringIO(capsys.readouterr().out)))
    assert code == 0
    assert rows[0] == ["output_dir", "exit_code"]
    assert [row[1] for row in rows[1:]] == ["0", "0"]
    assert all((tmp_path / name / "summary.txt").exists() for name in ("one", "two"))


def test_malformed_config_file_exits_three(capsys) -> None:
    fixture = Path(__file__).parent / "fixtures" / "malformed.json"

    assert main(["simulate", "--config", str(fixture)]) == 3
    assert "line 3" in capsys.readouterr().err


def test_missing_config_file_exits_four(tmp_path) -> None:
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 4


def test_configure_logging_falls_back_to_info(monkeypatch) -> None:
    monkeypatch.setenv(sdstab.LOG_LEVEL_ENV, "chatty")

    logger = sdstab.configure_logging()

    assert logger.level == logging.INFO
    assert sdstab.configure_logging("debug").level == logging.DEBUG
    assert len(logger.handlers) == 1
