from __future__ import annotations

import numpy as np
import pytest

from sdstab.dynamics import (
    ControlSystem,
    ScalarField,
    VectorField,
    bracket,
    check_clf_implication,
    lie_derivative,
    lie_span_rank,
    second_lie,
)
from sdstab.errors import DimensionError, NumericsError
from sdstab.scenarios.builtin import annulus_points


def _random_polynomial_field(rng: np.random.Generator, dim: int) -> VectorField:
    linear, square, cubic = (rng.normal(size=(dim, dim)) for _ in range(3))
    return VectorField(dim, lambda x: linear @ x + square @ (x * x) + 0.3 * cubic @ (x * x * x))


def test_lie_derivatives_of_example1_at_control_authority_state(example1_system, half_norm) -> None:
    x = np.array([2.0, 1.0])

    assert lie_derivative(example1_system.g, half_norm, x) == pytest.approx(3.0)
    assert lie_derivative(example1_system.f, half_norm, x) == pytest.approx(-33.0)


def test_bracket_witness_at_singular_state(example1_system, half_norm) -> None:
    x = np.array([1.0, -1.0])
    f, g = example1_system.f, example1_system.g

    assert lie_derivative(f, half_norm, x) == pytest.approx(0.0, abs=1e-12)
    assert lie_derivative(g, half_norm, x) == pytest.approx(0.0, abs=1e-12)
    assert bracket(f, g)(x) == pytest.approx([4.0, 6.0], abs=1e-6)
    assert lie_derivative(bracket(f, g), half_norm, x) == pytest.approx(-2.0, abs=1e-6)
    assert lie_derivative(bracket(g, f), half_norm, x) == pytest.approx(2.0, abs=1e-6)


def test_bracket_matches_commutator_of_second_derivatives() -> None:
    rng = np.random.default_rng(7)
    for pair in range(50):
        dim = 2 + pair % 3
        X = _random_polynomial_field(rng, dim)
        Y = _random_polynomial_field(rng, dim)
        phi = ScalarField.squared_norm(dim)
        XY = bracket(X, Y)
        for _ in range(10):
            x = rng.uniform(-1.0, 1.0, size=dim)
            expected = second_lie(X, Y, phi, x) - second_lie(Y, X, phi, x)
            assert lie_derivative(XY, phi, x) == pytest.approx(expected, rel=1e-5, abs=1e-8)


def test_field_algebra_is_linear(example1_system) -> None:
    f, g = example1_system.f, example1_system.g
    x = np.array([0.3, -1.2])
    combined = (f + g.scaled(2.5)) - f

    assert combined(x) == pytest.approx(2.5 * g(x))
    assert (-f)(x) == pytest.approx(-f(x))
    assert example1_system.vector_field([2.5])(x) == pytest.approx(f(x) + 2.5 * g(x))


def test_numeric_derivatives_agree_with_analytic_ones() -> None:
    analytic = ScalarField.squared_norm(3, 0.5)
    numeric = ScalarField(3, lambda x: 0.5 * float(x @ x))
    x = np.array([0.4, -1.1, 2.0])

    assert numeric.gradient(x) == pytest.approx(analytic.gradient(x), abs=1e-8)
    assert numeric.hessian(x) == pytest.approx(np.eye(3), abs=1e-5)


def test_dimension_mismatch_is_rejected(example1_system) -> None:
    phi3 = ScalarField.squared_norm(3)

    with pytest.raises(DimensionError):
        lie_derivative(example1_system.f, phi3, np.ones(2))
    with pytest.raises(DimensionError):
        example1_system.f(np.ones(3))


def test_non_finite_field_values_raise_numerics_error() -> None:
    broken = VectorField(2, lambda x: np.array([np.nan, 0.0]), name="broken")

    with pytest.raises(NumericsError):
        broken(np.ones(2))


def test_lie_span_rank_counts_bracket_directions(example2_scenario) -> None:
    fields = example2_scenario.system.fields
    rank, matrix = lie_span_rank(fields, [1.0, 0.5])

    assert rank == 2
    assert matrix.shape[0] == 2
    assert lie_span_rank(fields[:1], [1.0, 0.5])[0] == 1


def test_example1_satisfies_clf_implication_on_annulus(example1_system, half_norm) -> None:
    grid = annulus_points(0.2, 3.0, 100) + [np.array([1.0, -1.0]), np.array([1.0, 1.0])]

    report = check_clf_implication(example1_system, half_norm, grid, 1e-7)

    assert report.is_successful
    assert report.points_checked == 102
    assert report.singular_points >= 2


def test_clf_implication_reports_vanishing_bracket(zero_affine, half_norm) -> None:
    report = check_clf_implication(zero_affine, half_norm, [[1.0, 0.0], [0.0, 0.0]], 1e-7)

    assert not report.is_successful
    assert report.points_skipped == 1
    assert report.violations[0].clause == "bracket_vanishes"
    assert report.as_dict()["is_successful"] is False


def test_equilibrium_checks(example1_system) -> None:
    shifted = ControlSystem.affine(VectorField(2, lambda x: x + 1.0), VectorField.zero(2))

    assert example1_system.check_equilibrium()
    assert not shifted.check_equilibrium()


def test_bracket_is_antisymmetric() -> None:
    rng = np.random.default_rng(21)
    for dim in (2, 3, 4):
        X = _random_polynomial_field(rng, dim)
        Y = _random_polynomial_field(rng, dim)
        for _ in range(5):
            x = rng.uniform(-1.0, 1.0, size=dim)
            forward = bracket(X, Y)(x)
            backward = bracket(Y, X)(x)
            assert np.linalg.norm(forward + backward) <= 1e-9 * max(1.0, np.linalg.norm(forward))


def test_lie_derivative_is_linear_in_the_field() -> None:
    rng = np.random.default_rng(22)
    X = _random_polynomial_field(rng, 3)
    Y = _random_polynomial_field(rng, 3)
    phi = ScalarField(3, lambda x: float(x @ x) + float(x[0] * x[1] * x[2]), positive_definite=False)
    for a, b in ((2.0, -0.5), (-1.5, 3.0), (0.0, 1.0)):
        x = rng.uniform(-1.0, 1.0, size=3)
        combined = lie_derivative(X.scaled(a) + Y.scaled(b), phi, x)
        expected = a * lie_derivative(X, phi, x) + b * lie_derivative(Y, phi, x)
        assert combined == pytest.approx(expected, rel=1e-9, abs=1e-12)
