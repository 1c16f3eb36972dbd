"""Scenario configuration documents.

A config is a JSON object; only ``scenario`` is required::

    {
      "scenario": "example1",
      "x0": [1, -1],
      "sigma": 0.5,
      "tolerances": {"slack": 0.5},
      "system": {"a": "-(x1 + x2) - x1**3"}
    }

The inline payload in ``SDSTAB_CONFIG_JSON`` wins over ``--config FILE``.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from ..errors import ConfigParseError, ConfigValidationError

logger = logging.getLogger(__name__)

CONFIG_ENV_VAR = "SDSTAB_CONFIG_JSON"
OUTPUT_DIR_ENV_VAR = "SDSTAB_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "sdstab-output"

# state dimension per scenario; custom systems declare their own
SCENARIO_DIMS: Dict[str, Optional[int]] = {"example1": 2, "example2": 2, "custom": None}
DEFAULT_X0: Dict[str, Tuple[float, ...]] = {"example1": (1.0, -1.0), "example2": (1.0, 1.0)}

_TOP_LEVEL_KEYS = {
    "scenario",
    "x0",
    "sigma",
    "stop_phi",
    "step",
    "seed",
    "max_events",
    "tolerances",
    "output_dir",
    "system",
    "search",
    "phase_svg",
}


@dataclass(frozen=True)
class Tolerances:
    classification_tol: float = 1e-7
    band: float = 1e-3
    slack: float = 0.5
    margin_mu: float = 1e-4
    authority_ratio: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    x0: Tuple[float, ...]
    sigma: float = 0.5
    stop_phi: float = 1e-6
    step: float = 1e-3
    seed: int = 0
    max_events: int = 10000
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    system: Mapping[str, Any] = field(default_factory=dict)
    search: Mapping[str, Any] = field(default_factory=dict)
    phase_svg: bool = True

    @property
    def state_dim(self) -> int:
        return len(self.x0)

    def as_dict(self) -> dict[str, object]:
        return {
            "scenario": self.scenario,
            "x0": list(self.x0),
            "sigma": self.sigma,
            "stop_phi": self.stop_phi,
            "step": self.step,
            "seed": self.seed,
            "max_events": self.max_events,
            "tolerances": dict(self.tolerances.__dict__),
            "output_dir": str(self.output_dir),
            "system": dict(self.system),
            "search": dict(self.search),
            "phase_svg": self.phase_svg,
        }


def default_output_dir() -> Path:
    return Path(os.getenv(OUTPUT_DIR_ENV_VAR) or DEFAULT_OUTPUT_DIR)


def _positive_float(payload: Mapping[str, Any], key: str, default: float, prefix: str = "") -> float:
    name = f"{prefix}{key}"
    if key not in payload:
        return default
    value = payload[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(name, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise ConfigValidationError(name, f"must be positive, got {value!r}")
    return value


def _ratio(payload: Mapping[str, Any], key: str, default: float, prefix: str = "") -> float:
    name = f"{prefix}{key}"
    if key not in payload:
        return default
    value = payload[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigValidationError(name, f"expected a number, got {type(value).__name__}")
    value = float(value)
    if not 0.0 <= value < 1.0:
        raise ConfigValidationError(name, f"must lie in [0, 1), got {value!r}")
    return value


def _integer(payload: Mapping[str, Any], key: str, default: int, *, minimum: int) -> int:
    if key not in payload:
        return default
    value = payload[key]
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigValidationError(key, f"expected an integer, got {value!r}")
    if value < minimum:
        raise ConfigValidationError(key, f"must be at least {minimum}, got {value}")
    return value


def _section(payload: Mapping[str, Any], key: str) -> Dict[str, Any]:
    value = payload.get(key, {})
    if not isinstance(value, dict):
        raise ConfigParseError("expected a JSON object", field=key)
    return value


def _state_dim(scenario: str, system: Mapping[str, Any]) -> Optional[int]:
    if scenario == "custom":
        f = system.get("f")
        return len(f) if isinstance(f, list) and f else None
    return SCENARIO_DIMS[scenario]


def config_from_mapping(payload: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a decoded document and fill in defaults."""

    if not isinstance(payload, dict):
        raise ConfigParseError("config document must be a JSON object")

    unknown = sorted(set(payload) - _TOP_LEVEL_KEYS)
    for key in unknown:
        logger.warning("ignoring unknown config key %r", key)

    scenario = payload.get("scenario")
    if not isinstance(scenario, str) or not scenario:
        raise ConfigValidationError("scenario", "a scenario name is required")
    if scenario not in SCENARIO_DIMS:
        raise ConfigValidationError("scenario", f"unknown scenario {scenario!r}; expected one of {sorted(SCENARIO_DIMS)}")

    system = _section(payload, "system")
    search = _section(payload, "search")
    tol_payload = _section(payload, "tolerances")
    tolerances = Tolerances(
        classification_tol=_positive_float(tol_payload, "classification_tol", Tolerances.classification_tol,
                                           "tolerances."),
        band=_positive_float(tol_payload, "band", Tolerances.band, "tolerances."),
        slack=_positive_float(tol_payload, "slack", Tolerances.slack, "tolerances."),
        margin_mu=_positive_float(tol_payload, "margin_mu", Tolerances.margin_mu, "tolerances."),
        authority_ratio=_ratio(tol_payload, "authority_ratio", Tolerances.authority_ratio, "tolerances."),
    )

    expected_dim = _state_dim(scenario, system)
    if scenario == "custom" and expected_dim is None:
        raise ConfigValidationError("system.f", "custom scenarios need a nonempty list of drift components")
    if "x0" in payload:
        raw_x0 = payload["x0"]
        if not isinstance(raw_x0, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in raw_x0
        ):
            raise ConfigValidationError("x0", "expected a list of numbers")
        x0 = tuple(float(v) for v in raw_x0)
        if not all(math.isfinite(v) for v in x0):
            raise ConfigValidationError("x0", "components must be finite")
    elif scenario in DEFAULT_X0:
        x0 = DEFAULT_X0[scenario]
    else:
        raise ConfigValidationError("x0", "custom scenarios need an explicit initial state")
    if len(x0) != expected_dim:
        raise ConfigValidationError("x0", f"dimension {len(x0)} does not match scenario dimension {expected_dim}")

    output_dir = payload.get("output_dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigValidationError("output_dir", "expected a path string")

    phase_svg = payload.get("phase_svg", True)
    if not isinstance(phase_svg, bool):
        raise ConfigValidationError("phase_svg", "expected true or false")

    return ScenarioConfig(
        scenario=scenario,
        x0=x0,
        sigma=_positive_float(payload, "sigma", ScenarioConfig.sigma),
        stop_phi=_positive_float(payload, "stop_phi", ScenarioConfig.stop_phi),
        step=_positive_float(payload, "step", ScenarioConfig.step),
        seed=_integer(payload, "seed", ScenarioConfig.seed, minimum=0),
        max_events=_integer(payload, "max_events", ScenarioConfig.max_events, minimum=1),
        tolerances=tolerances,
        output_dir=Path(output_dir) if output_dir else default_output_dir(),
        system=system,
        search=search,
        phase_svg=phase_svg,
    )


def load_config(text: str) -> ScenarioConfig:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return config_from_mapping(payload)


def default_config(scenario: str) -> ScenarioConfig:
    return config_from_mapping({"scenario": scenario})


def _load_from_env() -> Optional[str]:
    payload = os.getenv(CONFIG_ENV_VAR)
    if not payload or not payload.strip():
        return None
    return payload


def _load_from_file(path: Path) -> str:
    with Path(path).open("r", encoding="utf-8") as handle:
        return handle.read()


def resolve_config(path: Optional[Path] = None, scenario: Optional[str] = None) -> ScenarioConfig:
    """Environment payload, else ``path``, else the defaults of ``scenario``.

    A positional ``scenario`` must agree with the one named by the document.
    """

    text = _load_from_env()
    if text is not None:
        logger.info("loading scenario config from %s", CONFIG_ENV_VAR)
    elif path is not None:
        text = _load_from_file(path)
    if text is None:
        if scenario is None:
            raise ConfigValidationError("scenario", "give a scenario name or a config document")
        return default_config(scenario)

    cfg = load_config(text)
    if scenario is not None and scenario != cfg.scenario:
        raise ConfigValidationError("scenario", f"command names {scenario!r} but the config names {cfg.scenario!r}")
    return cfg


__all__ = [
    "CONFIG_ENV_VAR",
    "OUTPUT_DIR_ENV_VAR",
    "ScenarioConfig",
    "Tolerances",
    "config_from_mapping",
    "default_config",
    "default_output_dir",
    "load_config",
    "resolve_config",
]
