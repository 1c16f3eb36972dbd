from __future__ import annotations

import numpy as np
import pytest

from sdstab.sampled_loop import LoopConfig, Verdict, run, verify_ledger
from sdstab.scenarios.builtin import annulus_points, example2


def _strictly_decreasing(values) -> bool:
    return all(later < earlier for earlier, later in zip(values, values[1:]))


def test_composite_loop_converges_from_annulus_starts(example2_scenario) -> None:
    controller = example2_scenario.make_controller()
    cfg = LoopConfig(stop_phi=1e-4, max_events=2000)
    starts = [p for p in annulus_points(0.1, 3.0, 10, seed=2) if np.all(np.abs(p) > 1e-3)]

    for xi0 in starts:
        outcome = run(example2_scenario.system, controller, xi0, cfg)

        assert outcome.verdict is Verdict.CONVERGED, outcome.cause
        assert _strictly_decreasing(outcome.ledger.phi_before)
        assert verify_ledger(outcome.ledger).is_successful
        assert {event.case for event in outcome.ledger} <= {"SteerX", "SteerY", "Boundary"}


def test_controller_value_is_merged_lyapunov_value(example2_scenario) -> None:
    controller = example2_scenario.make_controller()

    assert controller.value([2.0, 1.0]) == pytest.approx(8.0)
    assert controller.value([0.5, 3.0]) == pytest.approx(9.0)


def test_bounded_gains_converge_above_the_gain_limit() -> None:
    scenario = example2("bounded")
    controller = scenario.make_controller()

    outcome = run(scenario.system, controller, [0.5, 2.5], LoopConfig(stop_phi=1e-4, max_events=2000))

    assert outcome.verdict is Verdict.CONVERGED, outcome.cause
    assert outcome.ledger[0].case == "SteerY"
    assert verify_ledger(outcome.ledger).is_successful
