from __future__ import annotations

import math

import numpy as np
import pytest

from sdstab.dynamics import ScalarField
from sdstab.errors import ChainViolation, DimensionError
from sdstab.scenarios.builtin import example2
from sdstab.smallgain import (
    GainSetup,
    RegimeVariant,
    build_interpolants,
    check_small_gain,
    classify_regime,
    linear,
    power,
    psi,
    q,
    saturating,
)

GRID = np.geomspace(1e-3, 1e3, 50)


def _setup(gamma1, Gamma2, v_weight: float = 1.0) -> GainSetup:
    square = power(2.0)
    V = ScalarField.squared_norm(1, v_weight)
    W = ScalarField.squared_norm(1, 1.0)
    return GainSetup(V, W, square, square, square, square, gamma1, Gamma2)


def test_linear_gains_pass_small_gain_check() -> None:
    setup = _setup(linear(2.0), linear(1.0))

    report = check_small_gain(setup, GRID)

    assert report.is_successful
    assert report.points_checked == 50
    assert not report.limit_checked
    assert setup.lower(3.0) == pytest.approx(3.0)
    assert setup.upper(3.0) == pytest.approx(12.0)


def test_equal_gains_fail_at_every_grid_point() -> None:
    setup = _setup(linear(1.0), linear(1.0))

    report = check_small_gain(setup, GRID)

    assert not report.is_successful
    assert len(report.violations) == len(GRID)
    assert report.as_dict()["is_successful"] is False


def test_grid_must_be_positive_and_sorted() -> None:
    setup = _setup(linear(2.0), linear(1.0))

    with pytest.raises(ValueError):
        check_small_gain(setup, [0.0, 1.0])
    with pytest.raises(ValueError):
        check_small_gain(setup, [2.0, 1.0])


def test_interpolants_split_the_gap_in_thirds() -> None:
    interpolants = build_interpolants(linear(1.0), linear(4.0), GRID)

    assert interpolants.ell1(1.5) == pytest.approx(3.0)
    assert interpolants.ell2(1.5) == pytest.approx(4.5)
    assert interpolants.R1 == math.inf


def test_interpolants_need_a_strict_gap() -> None:
    with pytest.raises(ChainViolation) as excinfo:
        build_interpolants(linear(1.0), linear(1.0), GRID)

    assert excinfo.value.index == 0


def test_bounded_interpolants_have_ordered_limits() -> None:
    interpolants = build_interpolants(saturating(1.0), saturating(4.0), GRID, bounded=True)

    assert interpolants.R1 == pytest.approx(2.0, rel=1e-5)
    assert interpolants.R2 == pytest.approx(3.0, rel=1e-5)


def test_bounded_example_builds_strict_limit_chain() -> None:
    setup = example2("bounded").setup

    assert setup.bounded
    assert setup.r == pytest.approx(1.0, rel=1e-5)
    assert setup.R1 == pytest.approx(2.0, rel=1e-5)
    assert setup.R2 == pytest.approx(3.0, rel=1e-5)
    assert setup.R2 > setup.R1 > setup.r


def test_build_rejects_gains_without_small_gain_margin() -> None:
    square = power(2.0)
    V = ScalarField.squared_norm(1, 1.0)

    with pytest.raises(ChainViolation):
        GainSetup.build(V, V, square, square, square, square, linear(1.0), linear(1.0))


def test_psi_is_the_larger_of_its_two_terms() -> None:
    setup = example2().setup

    assert psi(setup, 1, [0.0], [0.0]) == 0.0
    assert psi(setup, 1, [math.sqrt(1.5)], [math.sqrt(5.0)]) == pytest.approx(5.0)
    assert psi(setup, 1, [2.0], [1.0]) == pytest.approx(8.0)
    assert psi(setup, 2, [2.0], [1.0]) == pytest.approx(12.0)
    with pytest.raises(DimensionError):
        psi(setup, 1, [1.0, 0.0], [1.0])


def test_regime_classification() -> None:
    setup = example2().setup

    assert classify_regime(setup, [1.0], [0.0]).variant is RegimeVariant.STEER_X
    assert classify_regime(setup, [0.0], [1.0]).variant is RegimeVariant.STEER_Y
    boundary = classify_regime(setup, [1.0], [math.sqrt(2.0)])
    assert boundary.variant is RegimeVariant.BOUNDARY
    assert boundary.band == pytest.approx(3e-3)
    with pytest.raises(ValueError):
        classify_regime(setup, [0.0], [0.0])


def test_strengthened_margin_has_a_floor() -> None:
    assert q(0.0) == 1e-6
    assert q(10.0) == pytest.approx(1e-2)


def test_sandwich_bounds_are_spot_checked() -> None:
    grid = [[-2.0], [0.5], [3.0]]

    assert example2().setup.check_sandwich(grid, grid).is_successful
    report = _setup(linear(2.0), linear(1.0), v_weight=2.0).check_sandwich(grid, grid)
    assert not report.is_successful
    assert {violation.function for violation in report.violations} == {"V"}


def test_psi_dominates_both_terms_and_attains_one() -> None:
    setup = example2().setup
    rng = np.random.default_rng(5)
    for _ in range(50):
        x, y = rng.uniform(-3.0, 3.0, size=1), rng.uniform(-3.0, 3.0, size=1)
        for i in (1, 2):
            w_term = setup.W(y)
            ell_term = setup.ell(i)(setup.V(x))
            value = psi(setup, i, x, y)
            assert value >= w_term and value >= ell_term
            assert value == pytest.approx(w_term) or value == pytest.approx(ell_term)
            assert value > 0.0
