"""Fixed-step integration of controlled trajectories under piecewise-constant inputs."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .dynamics import ControlSystem, ScalarField, as_state
from .errors import BlowupError, DimensionError, EmptyScheduleError, NumericsError

logger = logging.getLogger(__name__)

DEFAULT_STEP = 1e-3
BLOWUP_NORM = 1e12


@dataclass(frozen=True)
class Segment:
    """A control held constant for ``duration`` seconds."""

    duration: float
    control: Tuple[float, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.duration) and self.duration > 0.0):
            raise ValueError(f"segment durations must be positive and finite, got {self.duration!r}")


@dataclass(frozen=True)
class ControlSchedule:
    """An ordered list of constant-control segments."""

    segments: Tuple[Segment, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        widths = {len(segment.control) for segment in self.segments}
        if len(widths) > 1:
            raise DimensionError("all segments must carry controls of the same dimension")

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[float, Sequence[float]]]) -> "ControlSchedule":
        """Build from ``(duration, control)`` pairs, dropping zero-length pieces."""

        segments = []
        for duration, control in pairs:
            duration = float(duration)
            if duration == 0.0:
                continue
            segments.append(Segment(duration, tuple(float(v) for v in np.atleast_1d(control))))
        return cls(tuple(segments))

    @classmethod
    def constant(cls, duration: float, control: Sequence[float]) -> "ControlSchedule":
        return cls.from_pairs([(duration, control)])

    @property
    def total_duration(self) -> float:
        return float(sum(segment.duration for segment in self.segments))

    @property
    def input_dim(self) -> Optional[int]:
        return len(self.segments[0].control) if self.segments else None

    def concat(self, other: "ControlSchedule") -> "ControlSchedule":
        return ControlSchedule(self.segments + other.segments)

    __add__ = concat

    def reversed_negated(self) -> "ControlSchedule":
        """Segments in reverse order with negated controls."""

        return ControlSchedule(
            tuple(Segment(seg.duration, tuple(-v for v in seg.control)) for seg in reversed(self.segments))
        )

    def as_pairs(self) -> List[Tuple[float, Tuple[float, ...]]]:
        return [(segment.duration, segment.control) for segment in self.segments]

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self) -> Iterator[Segment]:
        return iter(self.segments)


@dataclass(frozen=True)
class Trajectory:
    """Sampled states; ``controls[k]`` is applied on ``[times[k], times[k+1])``."""

    times: np.ndarray
    states: np.ndarray
    controls: np.ndarray

    def __post_init__(self) -> None:
        if len(self.times) != len(self.states) or len(self.times) != len(self.controls):
            raise DimensionError("times, states and controls must have equal length")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def initial_state(self) -> np.ndarray:
        return self.states[0]

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def values(self, phi: ScalarField) -> np.ndarray:
        return np.array([phi.raw(state) for state in self.states])

    def norm_peak(self) -> float:
        return float(np.max(np.linalg.norm(self.states, axis=1)))

    def shifted(self, offset: float) -> "Trajectory":
        return Trajectory(self.times + float(offset), self.states, self.controls)

    def append(self, other: "Trajectory") -> "Trajectory":
        """Concatenate, merging the shared boundary sample."""

        if len(other) == 0:
            return self
        start = 1 if math.isclose(float(other.times[0]), self.final_time, rel_tol=0.0, abs_tol=1e-12) else 0
        controls = self.controls.copy()
        if start == 1:
            controls[-1] = other.controls[0]
        return Trajectory(
            np.concatenate([self.times, other.times[start:]]),
            np.vstack([self.states, other.states[start:]]),
            np.vstack([controls, other.controls[start:]]),
        )

    @classmethod
    def single(cls, t0: float, x0, input_dim: int) -> "Trajectory":
        state = as_state(x0)
        return cls(np.array([float(t0)]), state.reshape(1, -1), np.zeros((1, input_dim)))


def _segment_times(duration: float, h: float) -> List[float]:
    """Local step end-times inside a segment, ending exactly at ``duration``."""

    n_full = int(math.floor(duration / h + 1e-9))
    ends = [k * h for k in range(1, n_full + 1)]
    remainder = duration - n_full * h
    if remainder > 1e-12 * max(1.0, duration):
        ends.append(duration)
    elif ends:
        ends[-1] = duration
    else:
        ends.append(duration)
    return ends


def _rk4_step(sys: ControlSystem, x: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    k1 = sys.rhs(x, u)
    k2 = sys.rhs(x + 0.5 * h * k1, u)
    k3 = sys.rhs(x + 0.5 * h * k2, u)
    k4 = sys.rhs(x + h * k3, u)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(
    sys: ControlSystem,
    x0,
    schedule: ControlSchedule,
    step: Optional[float] = None,
    *,
    t0: float = 0.0,
) -> Trajectory:
    """Classic RK4 with a fixed step, shortened to land on segment boundaries.

    Without an explicit ``step`` every segment uses ``min(1e-3, duration / 10)``.
    """

    if step is not None and not (step > 0.0 and math.isfinite(step)):
        raise ValueError(f"integration step must be positive, got {step!r}")
    if len(schedule) == 0 or schedule.total_duration <= 0.0:
        raise EmptyScheduleError("cannot integrate an empty control schedule")
    if schedule.input_dim != sys.input_dim:
        raise DimensionError(
            f"schedule controls have dimension {schedule.input_dim}, system expects {sys.input_dim}"
        )
    state = as_state(x0, sys.state_dim).copy()
    if not np.all(np.isfinite(state)):
        raise NumericsError("initial state is not finite")

    times: List[float] = [float(t0)]
    states: List[np.ndarray] = [state]
    controls: List[np.ndarray] = []

    segment_start = float(t0)
    with np.errstate(over="ignore", invalid="ignore"):
        for segment in schedule:
            u = np.asarray(segment.control, dtype=float)
            h = step if step is not None else min(DEFAULT_STEP, segment.duration / 10.0)
            previous_local = 0.0
            for local_end in _segment_times(segment.duration, h):
                state = _rk4_step(sys, state, u, local_end - previous_local)
                if not np.all(np.isfinite(state)) or float(np.linalg.norm(state)) > BLOWUP_NORM:
                    raise BlowupError(times[-1], detail=f"|x| exceeded {BLOWUP_NORM:g}")
                previous_local = local_end
                controls.append(u)
                times.append(segment_start + local_end)
                states.append(state)
            segment_start += segment.duration

    controls.append(controls[-1])
    return Trajectory(np.array(times), np.array(states), np.array(controls))


def endpoint(sys: ControlSystem, x0, schedule: ControlSchedule, step: Optional[float] = None) -> np.ndarray:
    return integrate(sys, x0, schedule, step).final_state


def peak_along(
    sys: ControlSystem,
    x0,
    schedule: ControlSchedule,
    step: Optional[float],
    phi: ScalarField,
) -> float:
    """Largest Φ over the recorded samples; the sup-surrogate on the interval."""

    trajectory = integrate(sys, x0, schedule, step)
    return float(np.max(trajectory.values(phi)))


__all__ = [
    "BLOWUP_NORM",
    "ControlSchedule",
    "DEFAULT_STEP",
    "Segment",
    "Trajectory",
    "endpoint",
    "integrate",
    "peak_along",
]
