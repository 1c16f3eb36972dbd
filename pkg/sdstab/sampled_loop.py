"""Closed-loop sampled-data executor and its decrease ledger.

At every sampling instant ``t_i`` the controller is asked for an interval
``T_i ≤ σ`` and a schedule; the schedule is integrated, the event is written
to the ledger and ``t_{i+1} = t_i + T_i``. A run stops once Φ ≤ ``stop_phi``
(Converged), after ``max_events`` events (Budget), or when the controller or
integrator raises (Failed). Nothing is thrown out of :func:`run`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, List, Mapping, Optional, Protocol, Sequence

import numpy as np

from .clf_sdf import DwellResult
from .dynamics import ControlSystem, ScalarField, as_state
from .errors import SdstabError
from .integrate import ControlSchedule, Trajectory, integrate

if TYPE_CHECKING:  # pragma: no cover
    from .smallgain.class_k import ClassKFn

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    CONVERGED = "Converged"
    BUDGET = "Budget"
    FAILED = "Failed"


@dataclass(frozen=True)
class LoopConfig:
    sigma: float = 0.5
    stop_phi: float = 1e-6
    max_events: int = 10000
    step: float = 1e-3
    slack: float = 0.5
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.sigma > 0.0:
            raise ValueError("sigma must be positive")
        if not self.stop_phi > 0.0:
            raise ValueError("stop_phi must be positive")
        if self.max_events <= 0:
            raise ValueError("max_events must be positive")
        if not self.step > 0.0:
            raise ValueError("step must be positive")


class Controller(Protocol):
    """Anything that can certify a value and synthesize one sampling interval."""

    def value(self, x) -> float: ...

    def synthesize(self, x, sigma: float, step: Optional[float] = None) -> DwellResult: ...


@dataclass(frozen=True)
class LedgerEvent:
    index: int
    t: float
    dwell: float
    case: str
    phi_before: float
    phi_after: float
    phi_peak: float
    x: Optional[np.ndarray] = None
    schedule: ControlSchedule = field(default_factory=ControlSchedule)
    norm_peak: Optional[float] = None


LEDGER_COLUMNS = ("event", "t_i", "T_i", "case", "phi_before", "phi_after", "phi_peak")


@dataclass
class SampleLedger:
    """Per-event record of the decrease and boundedness surrogates."""

    events: List[LedgerEvent] = field(default_factory=list)

    def append(self, event: LedgerEvent) -> None:
        self.events.append(event)

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self) -> Iterator[LedgerEvent]:
        return iter(self.events)

    def __getitem__(self, index: int) -> LedgerEvent:
        return self.events[index]

    @property
    def phi_before(self) -> List[float]:
        return [event.phi_before for event in self.events]

    def as_rows(self) -> List[dict[str, object]]:
        return [
            {
                "event": event.index,
                "t_i": event.t,
                "T_i": event.dwell,
                "case": event.case,
                "phi_before": event.phi_before,
                "phi_after": event.phi_after,
                "phi_peak": event.phi_peak,
            }
            for event in self.events
        ]

    @classmethod
    def from_rows(cls, rows: Sequence[Mapping[str, object]]) -> "SampleLedger":
        ledger = cls()
        for row in rows:
            ledger.append(
                LedgerEvent(
                    index=int(row["event"]),
                    t=float(row["t_i"]),
                    dwell=float(row["T_i"]),
                    case=str(row["case"]),
                    phi_before=float(row["phi_before"]),
                    phi_after=float(row["phi_after"]),
                    phi_peak=float(row["phi_peak"]),
                )
            )
        return ledger


@dataclass
class RunOutcome:
    trajectory: Trajectory
    ledger: SampleLedger
    verdict: Verdict
    cause: Optional[str] = None

    @property
    def final_phi(self) -> Optional[float]:
        if self.ledger.events:
            return self.ledger.events[-1].phi_after
        return None

    def summary(self) -> dict[str, object]:
        return {
            "verdict": self.verdict.value,
            "events": len(self.ledger),
            "final_phi": self.final_phi,
            "final_time": self.trajectory.final_time,
            "cause": self.cause,
        }


def run(sys: ControlSystem, controller: Controller, x0, cfg: LoopConfig) -> RunOutcome:
    state = as_state(x0, sys.state_dim)
    trajectory = Trajectory.single(0.0, state, sys.input_dim)
    ledger = SampleLedger()
    if not np.all(np.isfinite(state)):
        return RunOutcome(trajectory, ledger, Verdict.FAILED, "initial state is not finite")

    try:
        phi_now = controller.value(state)
    except SdstabError as exc:
        return RunOutcome(trajectory, ledger, Verdict.FAILED, str(exc))
    if phi_now <= cfg.stop_phi:
        return RunOutcome(trajectory, ledger, Verdict.CONVERGED)

    t = 0.0
    for index in range(cfg.max_events):
        try:
            result = controller.synthesize(state, cfg.sigma, cfg.step)
            segment = result.trajectory.shifted(t)
            values = [controller.value(sample) for sample in segment.states]
        except SdstabError as exc:
            logger.warning("event %d at t=%.6g failed: %s", index, t, exc)
            return RunOutcome(trajectory, ledger, Verdict.FAILED, f"{type(exc).__name__}: {exc}")

        phi_after = values[-1]
        ledger.append(
            LedgerEvent(
                index=index,
                t=t,
                dwell=result.tau,
                case=result.label,
                phi_before=phi_now,
                phi_after=phi_after,
                phi_peak=max(values),
                x=state,
                schedule=result.schedule,
                norm_peak=segment.norm_peak(),
            )
        )
        logger.debug("event %d: t=%.6g T=%.3g %s phi %.6g -> %.6g", index, t, result.tau, result.label,
                     phi_now, phi_after)
        trajectory = trajectory.append(segment)
        t = t + result.tau
        state = segment.final_state
        phi_now = phi_after
        if phi_now <= cfg.stop_phi:
            return RunOutcome(trajectory, ledger, Verdict.CONVERGED)

    return RunOutcome(trajectory, ledger, Verdict.BUDGET, f"event budget {cfg.max_events} exhausted")


@dataclass
class LedgerCheck:
    name: str
    passed: bool
    first_violation: Optional[int] = None
    skipped: bool = False

    def as_dict(self) -> dict[str, object]:
        return {
            "name": self.name,
            "passed": self.passed,
            "first_violation": self.first_violation,
            "skipped": self.skipped,
        }


@dataclass
class LedgerReport:
    events_checked: int = 0
    bound: Optional[float] = None
    checks: List[LedgerCheck] = field(default_factory=list)

    @property
    def is_successful(self) -> bool:
        return all(check.passed for check in self.checks)

    def check(self, name: str) -> LedgerCheck:
        for item in self.checks:
            if item.name == name:
                return item
        raise KeyError(name)

    def as_dict(self) -> dict[str, object]:
        return {
            "events_checked": self.events_checked,
            "bound": self.bound,
            "checks": [item.as_dict() for item in self.checks],
            "is_successful": self.is_successful,
        }


def _first_index(flags: Sequence[bool]) -> Optional[int]:
    for index, flag in enumerate(flags):
        if flag:
            return index
    return None


def verify_ledger(
    ledger: SampleLedger,
    phi: Optional[ScalarField] = None,
    a1: Optional["ClassKFn"] = None,
    *,
    slack: float = 0.5,
    trajectory: Optional[Trajectory] = None,
) -> LedgerReport:
    """Re-check the ledger invariants and, given ``a1``, the uniform state bound."""

    if not ledger.events:
        raise ValueError("cannot verify an empty ledger")
    report = LedgerReport(events_checked=len(ledger))
    before = ledger.phi_before

    bad = [False] + [before[i] >= before[i - 1] for i in range(1, len(before))]
    first = _first_index(bad)
    report.checks.append(LedgerCheck("monotone_phi_before", first is None, first))

    first = _first_index([event.phi_after >= event.phi_before for event in ledger])
    report.checks.append(LedgerCheck("decrease_per_event", first is None, first))

    first = _first_index([event.phi_peak > (1.0 + slack) * event.phi_before for event in ledger])
    report.checks.append(LedgerCheck("peak_bound", first is None, first))

    if a1 is not None:
        head = ledger.events[0]
        phi0 = phi(head.x) if (phi is not None and head.x is not None) else head.phi_before
        report.bound = float(a1.invert((1.0 + slack) * phi0))
        if trajectory is not None:
            norms = np.linalg.norm(trajectory.states, axis=1)
            first = _first_index([float(n) > report.bound for n in norms])
            report.checks.append(LedgerCheck("uniform_bound", first is None, first))
        elif all(event.norm_peak is not None for event in ledger):
            first = _first_index([event.norm_peak > report.bound for event in ledger])
            report.checks.append(LedgerCheck("uniform_bound", first is None, first))
        else:
            report.checks.append(LedgerCheck("uniform_bound", True, None, skipped=True))
    return report


@dataclass
class HoldController:
    """Zero input held for the full σ; a probe baseline."""

    system: ControlSystem
    phi: ScalarField

    def value(self, x) -> float:
        return self.phi(x)

    def synthesize(self, x, sigma: float, step: Optional[float] = None) -> DwellResult:
        state = as_state(x, self.system.state_dim)
        schedule = ControlSchedule.constant(sigma, np.zeros(self.system.input_dim))
        h = min(step or 1e-3, sigma / 10.0)
        trajectory = integrate(self.system, state, schedule, h)
        values = trajectory.values(self.phi)
        return DwellResult(
            tau=float(sigma),
            schedule=schedule,
            phi_start=float(values[0]),
            phi_end=float(values[-1]),
            phi_peak=float(np.max(values)),
            label="Hold",
            trajectory=trajectory,
        )


@dataclass
class ProbeReport:
    rows: List[tuple[float, float]] = field(default_factory=list)
    trials: int = 0

    def as_dict(self) -> dict[str, object]:
        return {
            "trials": self.trials,
            "rows": [{"epsilon": eps, "delta": delta} for eps, delta in self.rows],
        }


def _sample_ball(rng: np.random.Generator, dim: int, radius: float) -> np.ndarray:
    direction = rng.standard_normal(dim)
    norm = float(np.linalg.norm(direction))
    if norm == 0.0:
        direction = np.eye(dim)[0]
        norm = 1.0
    return direction / norm * radius * float(rng.random()) ** (1.0 / dim)


def epsilon_delta_probe(
    sys: ControlSystem,
    controller: Controller,
    cfg: LoopConfig,
    eps_list: Sequence[float],
    trials: int,
    *,
    iterations: int = 8,
) -> ProbeReport:
    """Largest δ ≤ ε per ε keeping sampled runs inside the ε-ball."""

    report = ProbeReport(trials=max(0, int(trials)))
    if trials <= 0:
        return report
    if any(later < earlier for earlier, later in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must be ascending")

    rng = np.random.default_rng(cfg.seed)

    def stays_within(delta: float, eps: float) -> bool:
        for _ in range(trials):
            x0 = _sample_ball(rng, sys.state_dim, delta)
            outcome = run(sys, controller, x0, cfg)
            if outcome.verdict is Verdict.FAILED or outcome.trajectory.norm_peak() > eps:
                return False
        return True

    best = 0.0
    for eps in eps_list:
        eps = float(eps)
        if stays_within(eps, eps):
            delta = eps
        else:
            low, high = 0.0, eps
            for _ in range(iterations):
                mid = 0.5 * (low + high)
                if stays_within(mid, eps):
                    low = mid
                else:
                    high = mid
            delta = low
        best = max(best, delta)
        report.rows.append((eps, best))
        if not math.isclose(best, delta):
            logger.debug("delta for eps=%.3g lifted from %.3g to %.3g", eps, delta, best)
    return report


__all__ = [
    "Controller",
    "HoldController",
    "LEDGER_COLUMNS",
    "LedgerCheck",
    "LedgerEvent",
    "LedgerReport",
    "LoopConfig",
    "ProbeReport",
    "RunOutcome",
    "SampleLedger",
    "Verdict",
    "epsilon_delta_probe",
    "run",
    "verify_ledger",
]
