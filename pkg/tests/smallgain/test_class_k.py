from __future__ import annotations

import math

import numpy as np
import pytest

from sdstab.errors import ClassKViolation
from sdstab.smallgain import ClassKFn, linear, power, saturating


def test_numeric_inversion_round_trips() -> None:
    fn = ClassKFn(lambda s: s + s ** 3, name="s+s^3")

    for s in np.geomspace(1e-3, 1e2, 20):
        assert fn.invert(fn(float(s))) == pytest.approx(float(s), rel=1e-8)
    assert fn.invert(0.0) == 0.0


def test_analytic_inverse_is_used_for_powers() -> None:
    square = power(2.0, 0.5)

    assert square(2.0) == pytest.approx(2.0)
    assert square.invert(1.5) == pytest.approx(math.sqrt(3.0))
    assert square.inverse()(0.5) == pytest.approx(1.0)


def test_composition_applies_inner_first() -> None:
    square = power(2.0)
    chain = square.compose(linear(2.0)).compose(square.inverse())

    for s in (0.01, 1.0, 7.5):
        assert chain(s) == pytest.approx(4.0 * s)


@pytest.mark.parametrize(
    "func",
    [
        lambda s: 0.0,
        lambda s: 1.0 + s,
        lambda s: -s,
        lambda s: min(s, 1.0),
    ],
)
def test_non_class_k_functions_are_rejected(func) -> None:
    with pytest.raises(ClassKViolation):
        ClassKFn(func)


def test_bounded_functions_report_their_limit() -> None:
    bounded = saturating(2.0)

    assert bounded.limit() == pytest.approx(2.0, rel=1e-5)
    assert linear(3.0).limit() == math.inf
    with pytest.raises(ClassKViolation):
        bounded.inverse()


def test_negative_arguments_and_weights_are_rejected() -> None:
    fn = linear(1.0)

    with pytest.raises(ValueError):
        fn(-1.0)
    with pytest.raises(ValueError):
        fn.invert(-1.0)
    with pytest.raises(ValueError):
        ClassKFn.convex_combination(fn, linear(2.0), 1.0)


def test_convex_combination_lies_between_its_ends() -> None:
    mid = ClassKFn.convex_combination(linear(1.0), linear(4.0), 1.0 / 3.0)

    assert mid(3.0) == pytest.approx(6.0)
