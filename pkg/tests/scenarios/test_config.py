from __future__ import annotations

import json
import logging
from pathlib import Path

import pytest

from sdstab.errors import ConfigParseError, ConfigValidationError
from sdstab.scenarios.config import (
    CONFIG_ENV_VAR,
    OUTPUT_DIR_ENV_VAR,
    config_from_mapping,
    default_config,
    load_config,
    resolve_config,
)

FIXTURES = Path(__file__).parent / "fixtures"


def test_minimal_document_fills_defaults() -> None:
    cfg = resolve_config(FIXTURES / "example1_minimal.json")

    assert cfg.scenario == "example1"
    assert cfg.x0 == (1.0, -1.0)
    assert cfg.sigma == 0.5
    assert cfg.stop_phi == 1e-6
    assert cfg.step == 1e-3
    assert cfg.max_events == 10000
    assert cfg.tolerances.slack == 0.5
    assert cfg.tolerances.band == 1e-3
    assert cfg.output_dir == Path("sdstab-output")


def test_default_initial_states() -> None:
    assert default_config("example1").x0 == (1.0, -1.0)
    assert default_config("example2").x0 == (1.0, 1.0)


@pytest.mark.parametrize(
    "payload, field",
    [
        ({"scenario": "example1", "sigma": -0.5}, "sigma"),
        ({"scenario": "example1", "stop_phi": 0}, "stop_phi"),
        ({"scenario": "example3"}, "scenario"),
        ({}, "scenario"),
        ({"scenario": "example1", "x0": [1.0, 2.0, 3.0]}, "x0"),
        ({"scenario": "example1", "x0": ["a", 1]}, "x0"),
        ({"scenario": "example1", "tolerances": {"slack": -1}}, "tolerances.slack"),
        ({"scenario": "example1", "tolerances": {"authority_ratio": 1.5}}, "tolerances.authority_ratio"),
        ({"scenario": "example1", "max_events": 0}, "max_events"),
        ({"scenario": "example1", "seed": 1.5}, "seed"),
        ({"scenario": "custom", "x0": [1.0]}, "system.f"),
        ({"scenario": "custom", "system": {"f": ["-x1"]}}, "x0"),
    ],
)
def test_invalid_documents_name_the_field(payload, field) -> None:
    with pytest.raises(ConfigValidationError) as excinfo:
        config_from_mapping(payload)

    assert excinfo.value.field == field


def test_malformed_json_reports_its_position() -> None:
    text = (FIXTURES / "malformed.json").read_text(encoding="utf-8")

    with pytest.raises(ConfigParseError) as excinfo:
        load_config(text)

    assert excinfo.value.line == 3
    assert excinfo.value.column is not None


def test_non_object_sections_are_rejected() -> None:
    with pytest.raises(ConfigParseError):
        load_config("[1, 2]")
    with pytest.raises(ConfigParseError) as excinfo:
        config_from_mapping({"scenario": "example1", "tolerances": [1]})

    assert excinfo.value.field == "tolerances"


def test_unknown_keys_are_logged_and_ignored(caplog) -> None:
    with caplog.at_level(logging.WARNING, logger="sdstab.scenarios.config"):
        cfg = config_from_mapping({"scenario": "example1", "colour": "blue"})

    assert cfg.scenario == "example1"
    assert "colour" in caplog.text


def test_environment_payload_wins_over_file(monkeypatch) -> None:
    monkeypatch.setenv(CONFIG_ENV_VAR, json.dumps({"scenario": "example2", "sigma": 0.25}))

    cfg = resolve_config(FIXTURES / "example1_minimal.json")

    assert cfg.scenario == "example2"
    assert cfg.sigma == 0.25


def test_blank_environment_payload_is_ignored(monkeypatch) -> None:
    monkeypatch.setenv(CONFIG_ENV_VAR, "   ")

    assert resolve_config(FIXTURES / "example1_minimal.json").scenario == "example1"


def test_positional_scenario_must_match_document() -> None:
    with pytest.raises(ConfigValidationError) as excinfo:
        resolve_config(FIXTURES / "example1_minimal.json", "example2")

    assert excinfo.value.field == "scenario"
    with pytest.raises(ConfigValidationError):
        resolve_config()


def test_output_directory_defaults_to_environment(monkeypatch, tmp_path) -> None:
    monkeypatch.setenv(OUTPUT_DIR_ENV_VAR, str(tmp_path / "runs"))

    assert default_config("example1").output_dir == tmp_path / "runs"
    assert config_from_mapping({"scenario": "example1", "output_dir": "elsewhere"}).output_dir == Path("elsewhere")


def test_as_dict_round_trips_through_mapping() -> None:
    cfg = resolve_config(FIXTURES / "example2_bounded.json")

    again = config_from_mapping(cfg.as_dict())

    assert again == cfg
