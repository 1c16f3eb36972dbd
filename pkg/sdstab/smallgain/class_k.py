"""Comparison functions of class K / K∞ with composition and numeric inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from ..errors import ClassKViolation

LIMIT_PROBE = 1e6


def _probe_grid(domain_hint: float) -> np.ndarray:
    return np.concatenate([[0.0], np.geomspace(1e-6, max(domain_hint, 1.0), 61)])


@dataclass(frozen=True)
class ClassKFn:
    """A strictly increasing map ℝ⁺ → ℝ⁺ vanishing at zero.

    ``unbounded`` marks K∞ functions. Inversion uses ``inverse_fn`` when given,
    otherwise a bracketed root search on ``[0, hi]``.
    """

    func: Callable[[float], float]
    domain_hint: float = LIMIT_PROBE
    unbounded: bool = True
    inverse_fn: Optional[Callable[[float], float]] = None
    name: str = ""
    validate: bool = True

    def __post_init__(self) -> None:
        if not self.validate:
            return
        grid = _probe_grid(self.domain_hint)
        values = np.array([float(self.func(float(s))) for s in grid])
        if not np.all(np.isfinite(values)):
            raise ClassKViolation(f"{self.label} is not finite on its probe grid")
        if values[0] != 0.0:
            raise ClassKViolation(f"{self.label}(0) = {values[0]!r}, expected 0")
        steps = np.diff(values)
        if np.any(steps <= 0.0):
            index = int(np.argmax(steps <= 0.0))
            raise ClassKViolation(
                f"{self.label} is not strictly increasing between s={grid[index]:.3g} and s={grid[index + 1]:.3g}"
            )

    @property
    def label(self) -> str:
        return self.name or "class-K function"

    def __call__(self, s: float) -> float:
        if s < 0.0:
            raise ValueError(f"{self.label} is defined on s >= 0, got {s!r}")
        return float(self.func(float(s)))

    def invert(self, value: float) -> float:
        if value < 0.0:
            raise ValueError("cannot invert a negative value")
        if value == 0.0:
            return 0.0
        if self.inverse_fn is not None:
            return float(self.inverse_fn(float(value)))
        high = 1.0
        ceiling = max(self.domain_hint, 1.0) * 1e6
        while self.func(high) < value:
            high *= 2.0
            if high > ceiling:
                raise ValueError(f"{value!r} lies outside the range of {self.label}")
        return float(brentq(lambda s: self.func(s) - value, 0.0, high, xtol=1e-15, rtol=1e-13, maxiter=500))

    def compose(self, inner: "ClassKFn") -> "ClassKFn":
        """``self ∘ inner``."""

        outer_fn, inner_fn = self.func, inner.func
        inverse = None
        if self.inverse_fn is not None and inner.inverse_fn is not None:
            outer_inv, inner_inv = self.inverse_fn, inner.inverse_fn
            inverse = lambda v: inner_inv(outer_inv(v))  # noqa: E731
        return ClassKFn(
            lambda s: outer_fn(inner_fn(s)),
            domain_hint=inner.domain_hint,
            unbounded=self.unbounded and inner.unbounded,
            inverse_fn=inverse,
            name=f"{self.label}∘{inner.label}",
            validate=False,
        )

    def inverse(self) -> "ClassKFn":
        if not self.unbounded:
            raise ClassKViolation(f"{self.label} is bounded; its inverse is not defined on ℝ⁺")
        return ClassKFn(
            self.invert,
            domain_hint=self.domain_hint,
            unbounded=True,
            inverse_fn=self.func,
            name=f"{self.label}⁻¹",
            validate=False,
        )

    def limit(self, at: float = LIMIT_PROBE) -> float:
        """Numeric limit at infinity, evaluated at ``at``; ∞ for K∞ functions."""

        if self.unbounded:
            return math.inf
        return self(at)

    @staticmethod
    def convex_combination(lower: "ClassKFn", upper: "ClassKFn", weight: float, name: str = "") -> "ClassKFn":
        """``lower + weight·(upper − lower)`` for ``0 < weight < 1``."""

        if not 0.0 < weight < 1.0:
            raise ValueError("interpolation weight must lie in (0, 1)")
        low, high = lower.func, upper.func
        return ClassKFn(
            lambda s: low(s) + weight * (high(s) - low(s)),
            domain_hint=min(lower.domain_hint, upper.domain_hint),
            unbounded=lower.unbounded or upper.unbounded,
            name=name or f"{weight:.3g}-interpolant",
            validate=False,
        )


def power(exponent: float, coef: float = 1.0, name: str = "") -> ClassKFn:
    """``coef * s**exponent``."""

    if exponent <= 0.0 or coef <= 0.0:
        raise ClassKViolation("power functions need a positive exponent and coefficient")
    return ClassKFn(
        lambda s: coef * s ** exponent,
        inverse_fn=lambda v: (v / coef) ** (1.0 / exponent),
        name=name or f"{coef:g}s^{exponent:g}",
    )


def linear(coef: float, name: str = "") -> ClassKFn:
    return power(1.0, coef, name=name or f"{coef:g}s")


def saturating(coef: float = 1.0, name: str = "") -> ClassKFn:
    """``coef * s / (1 + s)``: bounded, with supremum ``coef``."""

    if coef <= 0.0:
        raise ClassKViolation("saturating functions need a positive coefficient")
    return ClassKFn(
        lambda s: coef * s / (1.0 + s),
        unbounded=False,
        inverse_fn=lambda v: v / (coef - v) if v < coef else math.inf,
        name=name or f"{coef:g}s/(1+s)",
    )


__all__ = ["ClassKFn", "LIMIT_PROBE", "linear", "power", "saturating"]
