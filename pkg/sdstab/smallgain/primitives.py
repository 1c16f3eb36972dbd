"""Motion-primitive search for driftless interconnections.

Candidates are constant inputs, two-segment concatenations and four-segment
bracket loops over an amplitude ladder and a halving dwell ladder. Frozen
section systems only order the candidates; acceptance always integrates the
true composite dynamics.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from ..clf_sdf import DwellResult
from ..dynamics import ControlSystem, as_state
from ..errors import BlowupError, NoPrimitiveFound, NumericsError
from ..integrate import DEFAULT_STEP, ControlSchedule, Trajectory, integrate
from .rank import CompositeSystem

logger = logging.getLogger(__name__)

StateValue = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class PrimitiveSearchOptions:
    amplitudes: Tuple[float, ...] = (4.0, 2.0, 1.0, 0.5, 0.25)
    max_halvings: int = 10
    slack: float = 0.5
    margin_mu: float = 1e-4
    prerank: bool = True
    prerank_substeps: int = 8

    def __post_init__(self) -> None:
        if not self.amplitudes or any(not a > 0.0 for a in self.amplitudes):
            raise ValueError("amplitudes must be a nonempty list of positive numbers")
        if self.max_halvings < 0:
            raise ValueError("max_halvings must be non-negative")


@dataclass(frozen=True)
class Candidate:
    index: int
    kind: str
    amplitude: float
    schedule: ControlSchedule


@dataclass(frozen=True)
class DecreaseTerm:
    """A Lyapunov value that must drop over the interval.

    ``margin(start, tau)`` is the required decrease when ``start > 0``.
    """

    name: str
    value: StateValue
    margin: Callable[[float, float], float]


@dataclass(frozen=True)
class SearchObjective:
    """What an accepted primitive has to achieve.

    ``active`` is reported in the result, every term in ``terms`` must
    decrease, and ``constraint`` must hold at every recorded sample.
    ``frozen`` names the section system used for pre-ranking: "x", "y" or None.
    """

    label: str
    active: StateValue
    terms: Tuple[DecreaseTerm, ...]
    constraint: Optional[Callable[[np.ndarray], bool]] = None
    frozen: Optional[str] = None
    frozen_value: Optional[StateValue] = None


def _unit(input_dim: int, index: int, sign: float, amplitude: float) -> np.ndarray:
    vec = np.zeros(input_dim)
    vec[index] = sign * amplitude
    return vec


def enumerate_candidates(input_dim: int, amplitude: float, tau: float, start: int = 0) -> List[Candidate]:
    """Constants, then ordered pairs, then bracket loops; indices continue from ``start``."""

    signed = [(i, s) for i in range(input_dim) for s in (1.0, -1.0)]
    out: List[Candidate] = []

    def add(kind: str, pairs) -> None:
        out.append(Candidate(start + len(out), kind, amplitude, ControlSchedule.from_pairs(pairs)))

    for i, s in signed:
        add("constant", [(tau, _unit(input_dim, i, s, amplitude))])
    for i, si in signed:
        for j, sj in signed:
            if i == j:
                continue
            add("pair", [(0.5 * tau, _unit(input_dim, i, si, amplitude)),
                         (0.5 * tau, _unit(input_dim, j, sj, amplitude))])
    for i in range(input_dim):
        for j in range(i + 1, input_dim):
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    a = _unit(input_dim, i, si, amplitude)
                    b = _unit(input_dim, j, sj, amplitude)
                    add("bracket", [(0.25 * tau, a), (0.25 * tau, b), (0.25 * tau, -a), (0.25 * tau, -b)])
    return out


def default_margin(margin_mu: float) -> Callable[[float, float], float]:
    return lambda start, tau: margin_mu * start * tau * tau


def _frozen_score(
    comp: CompositeSystem,
    objective: SearchObjective,
    xi0: np.ndarray,
    candidate: Candidate,
    substeps: int,
) -> float:
    x0, y0 = comp.split(xi0)
    if objective.frozen == "x":
        frozen: ControlSystem = comp.frozen_x_system(y0)
        start = x0
    else:
        frozen = comp.frozen_y_system(x0)
        start = y0
    h = candidate.schedule.total_duration / substeps
    try:
        end = integrate(frozen, start, candidate.schedule, h).final_state
    except (BlowupError, NumericsError):
        return math.inf
    return float(objective.frozen_value(end))


def _accepts(
    objective: SearchObjective,
    trajectory: Trajectory,
    tau: float,
    slack: float,
) -> bool:
    for term in objective.terms:
        values = np.array([term.value(state) for state in trajectory.states])
        if not np.all(np.isfinite(values)):
            return False
        start, end, peak = float(values[0]), float(values[-1]), float(np.max(values))
        if start > 0.0:
            if not end < start - term.margin(start, tau):
                return False
        elif end > start:
            return False
        if peak > (1.0 + slack) * start:
            return False
    if objective.constraint is not None:
        return all(objective.constraint(state) for state in trajectory.states)
    return True


def primitive_search(
    comp: CompositeSystem,
    objective: SearchObjective,
    xi0,
    sigma: float,
    step: Optional[float] = None,
    options: PrimitiveSearchOptions = PrimitiveSearchOptions(),
) -> DwellResult:
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    state = as_state(xi0, comp.system.state_dim)
    base_step = DEFAULT_STEP if step is None else step
    tried = 0

    tau = float(sigma)
    for halving in range(options.max_halvings + 1):
        candidates: List[Candidate] = []
        for amplitude in options.amplitudes:
            candidates.extend(enumerate_candidates(comp.input_dim, amplitude, tau, start=len(candidates)))
        if options.prerank and objective.frozen in ("x", "y"):
            scores = {c.index: _frozen_score(comp, objective, state, c, options.prerank_substeps) for c in candidates}
            candidates.sort(key=lambda c: (scores[c.index], c.index))

        for candidate in candidates:
            tried += 1
            h = min(base_step, tau / (10.0 * len(candidate.schedule)))
            try:
                trajectory = integrate(comp.system, state, candidate.schedule, h)
            except (BlowupError, NumericsError) as exc:
                logger.debug("candidate %d (%s) rejected: %s", candidate.index, candidate.kind, exc)
                continue
            if not _accepts(objective, trajectory, tau, options.slack):
                continue
            values = np.array([objective.active(s) for s in trajectory.states])
            logger.debug(
                "%s: accepted %s candidate %d, amplitude %g, dwell %.4g",
                objective.label,
                candidate.kind,
                candidate.index,
                candidate.amplitude,
                tau,
            )
            return DwellResult(
                tau=tau,
                schedule=candidate.schedule,
                phi_start=float(values[0]),
                phi_end=float(values[-1]),
                phi_peak=float(np.max(values)),
                label=objective.label,
                trajectory=trajectory,
                halvings=halving,
            )
        tau *= 0.5

    raise NoPrimitiveFound(state, objective.label, tried)


__all__ = [
    "Candidate",
    "DecreaseTerm",
    "PrimitiveSearchOptions",
    "SearchObjective",
    "default_margin",
    "enumerate_candidates",
    "primitive_search",
]
