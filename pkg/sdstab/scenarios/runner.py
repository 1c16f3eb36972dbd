"""Scenario orchestration: build the scenario, run the loop, write artifacts."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from ..errors import ConfigValidationError, SdstabError
from ..sampled_loop import LedgerReport, LoopConfig, RunOutcome, Verdict, run, verify_ledger
from . import artifacts
from .builtin import BuiltinScenario, scenario_for
from .config import ScenarioConfig

logger = logging.getLogger(__name__)

EXIT_CONVERGED = 0
EXIT_VIOLATIONS = 1
EXIT_BUDGET = 2
EXIT_FAILED = 3
EXIT_IO = 4

VERDICT_EXIT_CODES = {
    Verdict.CONVERGED: EXIT_CONVERGED,
    Verdict.BUDGET: EXIT_BUDGET,
    Verdict.FAILED: EXIT_FAILED,
}


@dataclass
class ScenarioResult:
    exit_code: int
    files: List[Path] = field(default_factory=list)
    outcome: Optional[RunOutcome] = None
    report: Optional[LedgerReport] = None
    error: Optional[str] = None


def loop_config(cfg: ScenarioConfig) -> LoopConfig:
    return LoopConfig(
        sigma=cfg.sigma,
        stop_phi=cfg.stop_phi,
        max_events=cfg.max_events,
        step=cfg.step,
        slack=cfg.tolerances.slack,
        seed=cfg.seed,
    )


def execute(cfg: ScenarioConfig, scenario: Optional[BuiltinScenario] = None) -> Tuple[BuiltinScenario, RunOutcome]:
    """Run the closed loop without touching the filesystem."""

    scenario = scenario or scenario_for(cfg)
    controller = scenario.make_controller(cfg.tolerances, cfg.search)
    outcome = run(scenario.system, controller, cfg.x0, loop_config(cfg))
    return scenario, outcome


def run_scenario(cfg: ScenarioConfig) -> ScenarioResult:
    logger.info("scenario %s from x0=%s (sigma=%g)", cfg.scenario, list(cfg.x0), cfg.sigma)
    try:
        scenario, outcome = execute(cfg)
    except SdstabError as exc:
        logger.error("scenario %s could not run: %s", cfg.scenario, exc)
        return ScenarioResult(EXIT_FAILED, error=str(exc))

    controller = scenario.make_controller(cfg.tolerances, cfg.search)
    report = None
    if outcome.ledger.events:
        phi = None if scenario.is_composite else scenario.phi
        report = verify_ledger(
            outcome.ledger,
            phi,
            scenario.a1,
            slack=cfg.tolerances.slack,
            trajectory=outcome.trajectory,
        )

    out_dir = Path(cfg.output_dir)
    files: List[Path] = []
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        files.append(artifacts.write_trajectory_csv(out_dir / artifacts.TRAJECTORY_FILE, outcome.trajectory,
                                                    controller.value))
        files.append(artifacts.write_ledger_csv(out_dir / artifacts.LEDGER_FILE, outcome.ledger))
        extra = {"scenario": cfg.scenario}
        if report is not None:
            extra["ledger_checks"] = "pass" if report.is_successful else "FAIL"
        files.append(artifacts.write_summary(out_dir / artifacts.SUMMARY_FILE, outcome, extra))
        if cfg.phase_svg and scenario.system.state_dim == 2:
            sample_times = [event.t for event in outcome.ledger]
            files.append(
                artifacts.write_phase_svg(out_dir / artifacts.PHASE_FILE, outcome.trajectory, sample_times,
                                          title=cfg.scenario)
            )
    except OSError as exc:
        logger.error("cannot write artifacts to %s: %s", out_dir, exc)
        return ScenarioResult(EXIT_IO, files, outcome, report, error=str(exc))

    exit_code = VERDICT_EXIT_CODES[outcome.verdict]
    logger.info(
        "scenario %s: %s after %d events, final phi %s; wrote %d files to %s",
        cfg.scenario,
        outcome.verdict.value,
        len(outcome.ledger),
        outcome.final_phi,
        len(files),
        out_dir,
    )
    return ScenarioResult(exit_code, files, outcome, report)


def _run_for_batch(cfg: ScenarioConfig) -> Tuple[str, int]:
    return str(cfg.output_dir), run_scenario(cfg).exit_code


def run_batch(configs: Sequence[ScenarioConfig], max_workers: Optional[int] = None) -> List[Tuple[str, int]]:
    """One process per config; results come back in input order."""

    directories = [Path(cfg.output_dir).resolve() for cfg in configs]
    if len(set(directories)) != len(directories):
        raise ConfigValidationError("output_dir", "batch runs need distinct output directories")
    with ProcessPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(_run_for_batch, configs))


__all__ = [
    "EXIT_BUDGET",
    "EXIT_CONVERGED",
    "EXIT_FAILED",
    "EXIT_IO",
    "EXIT_VIOLATIONS",
    "ScenarioResult",
    "execute",
    "loop_config",
    "run_batch",
    "run_scenario",
]
