"""Gain bookkeeping for two interconnected subsystems.

``lower = b2∘Γ2∘a1⁻¹`` and ``upper = b1∘γ1∘a2⁻¹`` bracket the admissible
interpolants; the small-gain property is ``lower < upper`` away from zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Sequence

import numpy as np

from ..dynamics import ScalarField, as_state
from ..errors import ChainViolation, DimensionError
from .class_k import LIMIT_PROBE, ClassKFn

logger = logging.getLogger(__name__)

DEFAULT_BAND = 1e-3
LIMIT_MARGIN = 1e-6
Q_FLOOR = 1e-6
Q_SLOPE = 1e-3


def _validate_grid(grid: Sequence[float]) -> np.ndarray:
    values = np.asarray(list(grid), dtype=float)
    if values.size == 0:
        raise ValueError("gain grid must not be empty")
    if np.any(values <= 0.0) or np.any(np.diff(values) <= 0.0):
        raise ValueError("gain grid must be positive and strictly ascending")
    return values


@dataclass(frozen=True)
class Interpolants:
    ell1: ClassKFn
    ell2: ClassKFn
    R1: float
    R2: float


@dataclass(frozen=True)
class GainSetup:
    """Lyapunov pair, sandwich bounds and gains of an interconnection."""

    V: ScalarField
    W: ScalarField
    a1: ClassKFn
    a2: ClassKFn
    b1: ClassKFn
    b2: ClassKFn
    gamma1: ClassKFn
    Gamma2: ClassKFn
    ell1: Optional[ClassKFn] = None
    ell2: Optional[ClassKFn] = None
    r: float = math.inf
    R1: float = math.inf
    R2: float = math.inf

    @property
    def lower(self) -> ClassKFn:
        return self.b2.compose(self.Gamma2).compose(self.a1.inverse())

    @property
    def upper(self) -> ClassKFn:
        return self.b1.compose(self.gamma1).compose(self.a2.inverse())

    @property
    def bounded(self) -> bool:
        return not self.gamma1.unbounded

    @property
    def x_dim(self) -> int:
        return self.V.dim

    @property
    def y_dim(self) -> int:
        return self.W.dim

    @classmethod
    def build(
        cls,
        V: ScalarField,
        W: ScalarField,
        a1: ClassKFn,
        a2: ClassKFn,
        b1: ClassKFn,
        b2: ClassKFn,
        gamma1: ClassKFn,
        Gamma2: ClassKFn,
        grid: Sequence[float] = tuple(np.geomspace(1e-3, 1e3, 50)),
    ) -> "GainSetup":
        """Assemble a setup with interpolants and limits filled in."""

        setup = cls(V, W, a1, a2, b1, b2, gamma1, Gamma2)
        report = check_small_gain(setup, grid)
        if not report.is_successful:
            first = report.violations[0]
            raise ChainViolation(first.index, first.s, {"lower": first.lower, "upper": first.upper})
        interpolants = build_interpolants(setup.lower, setup.upper, grid, bounded=setup.bounded)
        r = setup.lower.limit() if setup.bounded else math.inf
        if setup.bounded and not interpolants.R2 > interpolants.R1 > r:
            raise ChainViolation(len(grid) - 1, LIMIT_PROBE, {"r": r, "R1": interpolants.R1, "R2": interpolants.R2})
        return replace(setup, ell1=interpolants.ell1, ell2=interpolants.ell2, r=r, R1=interpolants.R1, R2=interpolants.R2)

    def ell(self, i: int) -> ClassKFn:
        chosen = {1: self.ell1, 2: self.ell2}.get(i)
        if chosen is None:
            if i not in (1, 2):
                raise ValueError(f"interpolant index must be 1 or 2, got {i!r}")
            raise ValueError("interpolants are not built; use GainSetup.build")
        return chosen

    def check_sandwich(self, x_grid: Sequence, y_grid: Sequence, tol: float = 1e-9) -> "SandwichReport":
        """Spot-check a1(|x|) ≤ V(x) ≤ a2(|x|) and b1(|y|) ≤ W(y) ≤ b2(|y|)."""

        report = SandwichReport()
        for name, fn, low, high, grid in (
            ("V", self.V, self.a1, self.a2, x_grid),
            ("W", self.W, self.b1, self.b2, y_grid),
        ):
            for point in grid:
                state = as_state(point, fn.dim)
                norm = float(np.linalg.norm(state))
                value = fn(state)
                report.points_checked += 1
                if not low(norm) - tol * (1.0 + value) <= value <= high(norm) + tol * (1.0 + value):
                    report.violations.append(SandwichViolation(name, state, low(norm), value, high(norm)))
        return report


@dataclass
class SandwichViolation:
    function: str
    point: np.ndarray
    lower: float
    value: float
    upper: float

    def as_dict(self) -> dict[str, object]:
        return {
            "function": self.function,
            "point": [float(v) for v in self.point],
            "lower": self.lower,
            "value": self.value,
            "upper": self.upper,
        }


@dataclass
class SandwichReport:
    points_checked: int = 0
    violations: List[SandwichViolation] = field(default_factory=list)

    @property
    def is_successful(self) -> bool:
        return not self.violations


@dataclass
class GainViolation:
    index: int
    s: float
    lower: float
    upper: float

    @property
    def gap(self) -> float:
        return self.upper - self.lower

    def as_dict(self) -> dict[str, object]:
        return {"index": self.index, "s": self.s, "lower": self.lower, "upper": self.upper, "gap": self.gap}


@dataclass
class SmallGainReport:
    """Outcome of checking ``upper(s) > lower(s)`` on a grid."""

    points_checked: int = 0
    min_gap: float = math.inf
    violations: List[GainViolation] = field(default_factory=list)
    limit_checked: bool = False
    limit_upper: Optional[float] = None
    limit_lower: Optional[float] = None
    limit_passed: bool = True

    @property
    def is_successful(self) -> bool:
        return not self.violations and self.limit_passed

    def as_dict(self) -> dict[str, object]:
        return {
            "points_checked": self.points_checked,
            "min_gap": self.min_gap,
            "violations": [violation.as_dict() for violation in self.violations],
            "limit_checked": self.limit_checked,
            "limit_upper": self.limit_upper,
            "limit_lower": self.limit_lower,
            "limit_passed": self.limit_passed,
            "is_successful": self.is_successful,
        }


def check_small_gain(setup: GainSetup, grid: Sequence[float], margin: float = LIMIT_MARGIN) -> SmallGainReport:
    values = _validate_grid(grid)
    lower, upper = setup.lower, setup.upper
    report = SmallGainReport()
    for index, s in enumerate(values):
        low, high = lower(float(s)), upper(float(s))
        report.points_checked += 1
        report.min_gap = min(report.min_gap, high - low)
        if not high > low:
            report.violations.append(GainViolation(index, float(s), low, high))

    if setup.bounded:
        s_max = float(values[-1])
        report.limit_checked = True
        report.limit_upper = upper(s_max)
        report.limit_lower = lower(s_max)
        report.limit_passed = report.limit_upper > report.limit_lower + margin * (1.0 + abs(report.limit_lower))

    logger.debug(
        "small-gain check: %d points, %d violations, min gap %.3g",
        report.points_checked,
        len(report.violations),
        report.min_gap,
    )
    return report


def build_interpolants(
    lower: ClassKFn,
    upper: ClassKFn,
    grid: Sequence[float],
    *,
    bounded: bool = False,
    limit_at: float = LIMIT_PROBE,
) -> Interpolants:
    """Convex combinations at weights 1/3 and 2/3, checked strictly on ``grid``."""

    values = _validate_grid(grid)
    ell1 = ClassKFn.convex_combination(lower, upper, 1.0 / 3.0, name="ell1")
    ell2 = ClassKFn.convex_combination(lower, upper, 2.0 / 3.0, name="ell2")
    for index, s in enumerate(values):
        chain = {"lower": lower(s), "ell1": ell1(s), "ell2": ell2(s), "upper": upper(s)}
        ordered = list(chain.values())
        if not all(a < b for a, b in zip(ordered, ordered[1:])):
            raise ChainViolation(index, float(s), chain)

    if bounded:
        R1, R2 = ell1(limit_at), ell2(limit_at)
    else:
        R1 = R2 = math.inf
    return Interpolants(ell1, ell2, R1, R2)


def psi(setup: GainSetup, i: int, x, y) -> float:
    """Ψᵢ(x, y) = max{W(y), ℓᵢ(V(x))}."""

    ell = setup.ell(i)
    state_x = as_state(x)
    state_y = as_state(y)
    if state_x.shape[0] != setup.x_dim or state_y.shape[0] != setup.y_dim:
        raise DimensionError(
            f"expected x in R^{setup.x_dim} and y in R^{setup.y_dim}, "
            f"got {state_x.shape[0]} and {state_y.shape[0]}"
        )
    return max(setup.W(state_y), ell(setup.V(state_x)))


class RegimeVariant(str, Enum):
    STEER_X = "SteerX"
    STEER_Y = "SteerY"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class Regime:
    variant: RegimeVariant
    w_value: float
    ell_value: float
    band: float

    @property
    def label(self) -> str:
        return self.variant.value


def classify_regime(setup: GainSetup, x, y, band: float = DEFAULT_BAND) -> Regime:
    """Compare W(y) with ℓ₁(V(x)); ``band`` is scaled by ``1 + W(y)``."""

    state_x = as_state(x, setup.x_dim)
    state_y = as_state(y, setup.y_dim)
    if not (np.any(state_x) or np.any(state_y)):
        raise ValueError("regimes are defined for nonzero (x, y) only")
    w_value = setup.W(state_y)
    ell_value = setup.ell(1)(setup.V(state_x))
    width = band * (1.0 + w_value)
    if abs(w_value - ell_value) <= width:
        variant = RegimeVariant.BOUNDARY
    elif w_value < ell_value:
        variant = RegimeVariant.STEER_X
    else:
        variant = RegimeVariant.STEER_Y
    return Regime(variant, w_value, ell_value, width)


def q(s: float) -> float:
    """Strengthened decrease margin for the y-subsystem above the gain limit."""

    return max(Q_FLOOR, Q_SLOPE * s)


__all__ = [
    "DEFAULT_BAND",
    "GainSetup",
    "GainViolation",
    "Interpolants",
    "Regime",
    "RegimeVariant",
    "SandwichReport",
    "SmallGainReport",
    "build_interpolants",
    "check_small_gain",
    "classify_regime",
    "psi",
    "q",
]
