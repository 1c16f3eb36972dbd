"""Built-in scenarios, scenario configuration and run orchestration."""

from .builtin import BuiltinScenario, custom, example1, example2, load_scenario, scenario_for
from .config import ScenarioConfig, Tolerances, default_config, load_config, resolve_config
from .runner import (
    EXIT_BUDGET,
    EXIT_CONVERGED,
    EXIT_FAILED,
    EXIT_IO,
    EXIT_VIOLATIONS,
    ScenarioResult,
    execute,
    run_batch,
    run_scenario,
)

__all__ = [
    "BuiltinScenario",
    "EXIT_BUDGET",
    "EXIT_CONVERGED",
    "EXIT_FAILED",
    "EXIT_IO",
    "EXIT_VIOLATIONS",
    "ScenarioConfig",
    "ScenarioResult",
    "Tolerances",
    "custom",
    "default_config",
    "example1",
    "example2",
    "execute",
    "load_config",
    "load_scenario",
    "resolve_config",
    "run_batch",
    "run_scenario",
    "scenario_for",
]
