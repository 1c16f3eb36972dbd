from __future__ import annotations

import csv
import dataclasses
from pathlib import Path

from sdstab.sampled_loop import verify_ledger
from sdstab.scenarios import EXIT_BUDGET, EXIT_CONVERGED, EXIT_FAILED, EXIT_IO, run_scenario
from sdstab.scenarios.artifacts import read_ledger_csv
from sdstab.scenarios.config import config_from_mapping


def _config(tmp_path: Path, **overrides):
    payload = {"scenario": "example1", "x0": [0.5, 0.5], "output_dir": str(tmp_path / "out")}
    payload.update(overrides)
    return config_from_mapping(payload)


def _strictly_decreasing(values) -> bool:
    return all(later < earlier for earlier, later in zip(values, values[1:]))


def test_converged_run_writes_all_artifacts(tmp_path) -> None:
    cfg = _config(tmp_path)

    result = run_scenario(cfg)

    assert result.exit_code == EXIT_CONVERGED
    out = tmp_path / "out"
    assert sorted(p.name for p in out.iterdir()) == ["ledger.csv", "phase.svg", "summary.txt", "trajectory.csv"]
    assert result.report is not None and result.report.is_successful

    with (out / "trajectory.csv").open(encoding="utf-8") as handle:
        header = next(csv.reader(handle))
    assert header == ["t", "x_1", "x_2", "u_1", "phi"]

    summary = (out / "summary.txt").read_text(encoding="utf-8")
    assert "verdict: Converged" in summary
    assert "ledger_checks: pass" in summary
    assert (out / "phase.svg").read_text(encoding="utf-8").startswith("<?xml")


def test_ledger_file_round_trips_and_verifies(tmp_path) -> None:
    result = run_scenario(_config(tmp_path))

    ledger = read_ledger_csv(tmp_path / "out" / "ledger.csv")

    assert ledger.phi_before == result.outcome.ledger.phi_before
    assert _strictly_decreasing(ledger.phi_before)
    assert verify_ledger(ledger).is_successful


def test_identical_configs_produce_identical_files(tmp_path) -> None:
    first = _config(tmp_path, stop_phi=1e-3, output_dir=str(tmp_path / "a"))
    second = dataclasses.replace(first, output_dir=tmp_path / "b")

    run_scenario(first)
    run_scenario(second)

    for name in ("ledger.csv", "trajectory.csv", "summary.txt"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_event_budget_maps_to_exit_code_two(tmp_path) -> None:
    result = run_scenario(_config(tmp_path, stop_phi=1e-12, max_events=1))

    assert result.exit_code == EXIT_BUDGET
    assert "verdict: Budget" in (tmp_path / "out" / "summary.txt").read_text(encoding="utf-8")


def test_unwritable_output_directory_maps_to_exit_code_four(tmp_path) -> None:
    blocker = tmp_path / "file.txt"
    blocker.write_text("not a directory", encoding="utf-8")

    result = run_scenario(_config(tmp_path, stop_phi=1e-2, output_dir=str(blocker / "out")))

    assert result.exit_code == EXIT_IO
    assert result.outcome is not None


def test_failed_run_still_writes_summary(tmp_path) -> None:
    cfg = config_from_mapping(
        {
            "scenario": "custom",
            "x0": [1.0, 0.0],
            "output_dir": str(tmp_path / "out"),
            "system": {"f": ["x1", "x2"], "g": ["0", "0"]},
        }
    )

    result = run_scenario(cfg)

    assert result.exit_code == EXIT_FAILED
    summary = (tmp_path / "out" / "summary.txt").read_text(encoding="utf-8")
    assert "verdict: Failed" in summary
    assert "CLFConditionViolated" in summary


def test_scenario_errors_map_to_exit_code_three(tmp_path) -> None:
    cfg = _config(tmp_path, system={"a": "x1 + x2"})

    result = run_scenario(cfg)

    assert result.exit_code == EXIT_FAILED
    assert result.outcome is None
    assert "system.a" in result.error
