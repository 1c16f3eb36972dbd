"""Driftless interconnections ξ̇ = Σ uᵢ Fᵢ(x, y) and their Lie rank conditions."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from ..dynamics import ControlSystem, Shape, VectorField, as_state, lie_span_rank
from ..errors import DimensionError
from .gains import GainSetup

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CompositeSystem:
    """A driftless system on ℝⁿ × ℝᵐ whose first ``x_dim`` coordinates are x."""

    system: ControlSystem
    x_dim: int

    def __post_init__(self) -> None:
        if self.system.shape is not Shape.DRIFTLESS:
            raise DimensionError("composite systems must be driftless")
        if not 0 < self.x_dim < self.system.state_dim:
            raise DimensionError("x_dim must split the state into two nonempty blocks")

    @property
    def y_dim(self) -> int:
        return self.system.state_dim - self.x_dim

    @property
    def input_dim(self) -> int:
        return self.system.input_dim

    def split(self, xi) -> Tuple[np.ndarray, np.ndarray]:
        state = as_state(xi, self.system.state_dim)
        return state[: self.x_dim], state[self.x_dim:]

    def join(self, x, y) -> np.ndarray:
        return np.concatenate([as_state(x, self.x_dim), as_state(y, self.y_dim)])

    def x_section_fields(self, y) -> List[VectorField]:
        """x ↦ Aᵢ(x, y) with y held fixed."""

        frozen_y = as_state(y, self.y_dim).copy()
        n = self.x_dim
        return [
            VectorField(n, lambda x, F=F: F.raw(np.concatenate([x, frozen_y]))[:n], None, F.fd_scale,
                        f"A{i + 1}")
            for i, F in enumerate(self.system.fields)
        ]

    def y_section_fields(self, x) -> List[VectorField]:
        """y ↦ Bᵢ(x, y) with x held fixed."""

        frozen_x = as_state(x, self.x_dim).copy()
        n, m = self.x_dim, self.y_dim
        return [
            VectorField(m, lambda y, F=F: F.raw(np.concatenate([frozen_x, y]))[n:], None, F.fd_scale,
                        f"B{i + 1}")
            for i, F in enumerate(self.system.fields)
        ]

    def frozen_x_system(self, y) -> ControlSystem:
        return ControlSystem.driftless(self.x_section_fields(y), name="frozen-x")

    def frozen_y_system(self, x) -> ControlSystem:
        return ControlSystem.driftless(self.y_section_fields(x), name="frozen-y")


@dataclass
class RankFailure:
    point: np.ndarray
    condition: str
    rank: int
    required: int

    def as_dict(self) -> dict[str, object]:
        return {
            "point": [float(v) for v in self.point],
            "condition": self.condition,
            "rank": self.rank,
            "required": self.required,
        }


@dataclass
class RankReport:
    points_checked: int = 0
    points_skipped: int = 0
    conditions_evaluated: int = 0
    failures: List[RankFailure] = field(default_factory=list)

    @property
    def is_successful(self) -> bool:
        return not self.failures

    def as_dict(self) -> dict[str, object]:
        return {
            "points_checked": self.points_checked,
            "points_skipped": self.points_skipped,
            "conditions_evaluated": self.conditions_evaluated,
            "failures": [failure.as_dict() for failure in self.failures],
            "is_successful": self.is_successful,
        }


def check_rank_conditions(
    comp: CompositeSystem,
    setup: GainSetup,
    grid: Sequence,
    depth: int = 2,
    rel_tol: float = 1e-8,
) -> RankReport:
    """Check the Lie rank requirements on the regions where each applies.

    * x-sections span ℝⁿ where x ≠ 0 and |y| < γ₁(|x|);
    * y-sections span ℝᵐ where y ≠ 0 and |y| > Γ₂(|x|);
    * the full fields span ℝⁿ⁺ᵐ where Γ₂(|x|) < |y| < γ₁(|x|).

    ``grid`` holds stacked points ξ = (x, y); the origin is skipped.
    """

    report = RankReport()
    n, m = comp.x_dim, comp.y_dim
    for point in grid:
        xi = as_state(point, n + m)
        x, y = comp.split(xi)
        norm_x, norm_y = float(np.linalg.norm(x)), float(np.linalg.norm(y))
        if norm_x == 0.0 and norm_y == 0.0:
            report.points_skipped += 1
            continue
        report.points_checked += 1
        upper, lower = setup.gamma1(norm_x), setup.Gamma2(norm_x)

        checks = []
        if norm_x > 0.0 and norm_y < upper:
            checks.append(("x_section", comp.x_section_fields(y), x, n))
        if norm_y > 0.0 and norm_y > lower:
            checks.append(("y_section", comp.y_section_fields(x), y, m))
        if lower < norm_y < upper:
            checks.append(("full", list(comp.system.fields), xi, n + m))

        for condition, fields, at, required in checks:
            report.conditions_evaluated += 1
            rank, _ = lie_span_rank(fields, at, depth=depth, rel_tol=rel_tol)
            if rank < required:
                report.failures.append(RankFailure(xi, condition, rank, required))

    logger.debug(
        "rank check: %d points, %d skipped, %d failures",
        report.points_checked,
        report.points_skipped,
        len(report.failures),
    )
    return report


__all__ = ["CompositeSystem", "RankFailure", "RankReport", "check_rank_conditions"]
