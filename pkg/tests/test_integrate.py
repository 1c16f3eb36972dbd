from __future__ import annotations

import math

import numpy as np
import pytest

from sdstab.dynamics import ControlSystem, ScalarField
from sdstab.errors import BlowupError, DimensionError, EmptyScheduleError
from sdstab.integrate import ControlSchedule, Segment, Trajectory, integrate, peak_along


def _decay_system() -> ControlSystem:
    return ControlSystem.general(lambda x, u: -x + u, 1, 1, name="decay")


def test_linear_decay_matches_exponential() -> None:
    traj = integrate(_decay_system(), [1.0], ControlSchedule.constant(1.0, [0.0]), 1e-2)

    assert traj.final_time == pytest.approx(1.0)
    assert traj.final_state[0] == pytest.approx(math.exp(-1.0), rel=1e-8)


def test_rk4_error_shrinks_with_fourth_power_of_step() -> None:
    sys = _decay_system()
    schedule = ControlSchedule.constant(1.0, [0.0])
    exact = math.exp(-1.0)

    coarse = abs(integrate(sys, [1.0], schedule, 0.1).final_state[0] - exact)
    fine = abs(integrate(sys, [1.0], schedule, 0.05).final_state[0] - exact)

    assert 12.0 < coarse / fine < 20.0


def test_steps_land_on_segment_boundaries() -> None:
    schedule = ControlSchedule.from_pairs([(0.25, [1.0]), (0.3, [-1.0])])

    traj = integrate(_decay_system(), [0.0], schedule, 0.1)

    assert traj.final_time == pytest.approx(0.55)
    assert np.any(np.isclose(traj.times, 0.25, rtol=0.0, atol=1e-12))
    assert len(traj.controls) == len(traj.times)
    assert traj.controls[0][0] == 1.0
    assert traj.controls[-1][0] == -1.0


def test_empty_schedule_is_rejected() -> None:
    with pytest.raises(EmptyScheduleError):
        integrate(_decay_system(), [1.0], ControlSchedule.from_pairs([(0.0, [1.0])]))


def test_segment_duration_must_be_positive() -> None:
    with pytest.raises(ValueError):
        Segment(-0.1, (0.0,))


def test_control_dimension_must_match_system() -> None:
    with pytest.raises(DimensionError):
        integrate(_decay_system(), [1.0], ControlSchedule.constant(0.5, [0.0, 1.0]))


def test_finite_time_escape_raises_blowup() -> None:
    sys = ControlSystem.general(lambda x, u: x * x, 1, 1, name="escape")

    with pytest.raises(BlowupError) as excinfo:
        integrate(sys, [1.0], ControlSchedule.constant(2.0, [0.0]), 1e-3)

    assert excinfo.value.last_time < 1.01


def test_append_merges_boundary_sample() -> None:
    sys = _decay_system()
    first = integrate(sys, [1.0], ControlSchedule.constant(0.5, [0.0]), 0.1)
    second = integrate(sys, first.final_state, ControlSchedule.constant(0.5, [0.0]), 0.1).shifted(0.5)

    joined = first.append(second)

    assert len(joined) == len(first) + len(second) - 1
    assert joined.final_time == pytest.approx(1.0)
    assert isinstance(Trajectory.single(0.0, [1.0], 1).append(first), Trajectory)


def test_reversed_negated_schedule() -> None:
    schedule = ControlSchedule.from_pairs([(0.1, [1.0, 0.0]), (0.2, [0.0, -2.0])])

    assert schedule.reversed_negated().as_pairs() == [(0.2, (-0.0, 2.0)), (0.1, (-1.0, -0.0))]
    assert schedule.total_duration == pytest.approx(0.3)


def test_peak_along_reports_largest_sample(half_norm) -> None:
    sys = ControlSystem.general(lambda x, u: u, 2, 2)
    schedule = ControlSchedule.from_pairs([(1.0, [1.0, 0.0]), (1.0, [-1.0, 0.0])])

    assert peak_along(sys, [0.0, 0.0], schedule, 0.1, half_norm) == pytest.approx(0.5)


def _oscillator() -> ControlSystem:
    return ControlSystem.general(lambda x, u: np.array([x[1], -x[0]]), 2, 1, name="oscillator")


def test_oscillator_returns_after_one_period() -> None:
    x0 = np.array([1.0, 0.5])

    end = integrate(_oscillator(), x0, ControlSchedule.constant(2.0 * math.pi, [0.0]), 1e-3).final_state

    assert np.max(np.abs(end - x0)) < 1e-6


def test_splitting_a_segment_keeps_the_endpoint() -> None:
    sys = _oscillator()
    whole = integrate(sys, [1.0, 0.0], ControlSchedule.constant(1.0, [0.0]), 1e-3).final_state
    split = integrate(sys, [1.0, 0.0], ControlSchedule.from_pairs([(0.5, [0.0]), (0.5, [0.0])]), 1e-3).final_state

    assert np.max(np.abs(whole - split)) < 1e-10


def test_restart_from_intermediate_state_matches_single_run() -> None:
    sys = _decay_system()
    schedule = ControlSchedule.from_pairs([(0.4, [1.0]), (0.6, [-1.0])])
    single = integrate(sys, [0.3], schedule, 1e-3).final_state

    middle = integrate(sys, [0.3], ControlSchedule.constant(0.4, [1.0]), 1e-3).final_state
    restarted = integrate(sys, middle, ControlSchedule.constant(0.6, [-1.0]), 1e-3).final_state

    assert restarted[0] == pytest.approx(single[0], abs=1e-8)


def test_peak_along_exponential_growth() -> None:
    growth = ControlSystem.general(lambda x, u: x, 1, 1, name="growth")
    phi = ScalarField.squared_norm(1, 0.5)

    peak = peak_along(growth, [1.0], ControlSchedule.constant(1.0, [0.0]), 1e-3, phi)

    assert peak == pytest.approx(math.exp(2.0) / 2.0, abs=1e-6)


def test_schedule_concatenation_is_associative() -> None:
    a = ControlSchedule.constant(0.1, [1.0])
    b = ControlSchedule.from_pairs([(0.2, [-1.0]), (0.05, [0.5])])
    c = ControlSchedule.constant(0.3, [2.0])

    left = (a + b) + c
    right = a.concat(b.concat(c))

    assert left == right
    assert left.total_duration == pytest.approx(0.65)
    assert len(left) == 4
