"""Vector-field and scalar-field algebra for controlled systems.

Fields are thin wrappers around numpy callables. Derivatives use the analytic
pieces when the caller supplies them and fall back to central differences
otherwise:

* gradients and Jacobians use the step ``1e-6 * (1 + |x|)``;
* nested second-order terms (Hessians built from values, Jacobians of
  brackets) use ``1e-4 * (1 + |x|)``.

Brackets follow the convention ``XY := DY X`` so that
``[X, Y](x) = DY(x) X(x) - DX(x) Y(x)`` and ``[X, Y]Φ = X(YΦ) - Y(XΦ)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError, NumericsError

logger = logging.getLogger(__name__)

GRADIENT_STEP = 1e-6
NESTED_STEP = 1e-4

StateFn = Callable[[np.ndarray], np.ndarray]
MatrixFn = Callable[[np.ndarray], np.ndarray]


def as_state(x, dim: Optional[int] = None) -> np.ndarray:
    """Coerce ``x`` into a flat float vector, optionally checking its length."""

    state = np.asarray(x, dtype=float).reshape(-1)
    if dim is not None and state.shape[0] != dim:
        raise DimensionError(f"expected a state of dimension {dim}, got {state.shape[0]}")
    return state


def _fd_step(x: np.ndarray, scale: float) -> float:
    return scale * (1.0 + float(np.linalg.norm(x)))


def _require_finite(value, what: str, x: np.ndarray):
    if not np.all(np.isfinite(value)):
        raise NumericsError(f"{what} is not finite at x={x.tolist()}")
    return value


def _central_jacobian(func: StateFn, x: np.ndarray, scale: float, rows: int) -> np.ndarray:
    h = _fd_step(x, scale)
    jac = np.empty((rows, x.shape[0]))
    for j in range(x.shape[0]):
        step = np.zeros_like(x)
        step[j] = h
        jac[:, j] = (np.asarray(func(x + step), dtype=float) - np.asarray(func(x - step), dtype=float)) / (2.0 * h)
    return jac


@dataclass(frozen=True)
class VectorField:
    """A map ℝⁿ → ℝⁿ with an optional analytic Jacobian."""

    dim: int
    func: StateFn
    jacobian_fn: Optional[MatrixFn] = None
    fd_scale: float = GRADIENT_STEP
    name: str = ""

    def __post_init__(self) -> None:
        if int(self.dim) <= 0:
            raise DimensionError("vector field dimension must be positive")

    def raw(self, x: np.ndarray) -> np.ndarray:
        """Evaluate without dimension or finiteness checks (integrator hot path)."""

        return np.asarray(self.func(x), dtype=float).reshape(-1)

    def __call__(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        value = self.raw(state)
        if value.shape[0] != self.dim:
            raise DimensionError(
                f"field {self.name or '<anonymous>'} returned {value.shape[0]} components, expected {self.dim}"
            )
        return _require_finite(value, f"field {self.name or '<anonymous>'}", state)

    def jacobian(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        if self.jacobian_fn is not None:
            jac = np.asarray(self.jacobian_fn(state), dtype=float).reshape(self.dim, self.dim)
            return _require_finite(jac, f"Jacobian of {self.name or '<anonymous>'}", state)
        return self.numeric_jacobian(state)

    def numeric_jacobian(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        jac = _central_jacobian(self.raw, state, self.fd_scale, self.dim)
        return _require_finite(jac, f"numeric Jacobian of {self.name or '<anonymous>'}", state)

    @property
    def has_analytic_jacobian(self) -> bool:
        return self.jacobian_fn is not None

    def scaled(self, factor: float) -> "VectorField":
        factor = float(factor)
        jac = None
        if self.jacobian_fn is not None:
            base_jac = self.jacobian_fn
            jac = lambda x: factor * np.asarray(base_jac(x), dtype=float)  # noqa: E731
        base = self.raw
        return VectorField(
            self.dim,
            lambda x: factor * base(x),
            jac,
            self.fd_scale,
            f"{factor:g}*{self.name}" if self.name else "",
        )

    def __add__(self, other: "VectorField") -> "VectorField":
        if not isinstance(other, VectorField):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"cannot add fields of dimension {self.dim} and {other.dim}")
        jac = None
        if self.jacobian_fn is not None and other.jacobian_fn is not None:
            left_jac, right_jac = self.jacobian_fn, other.jacobian_fn
            jac = lambda x: np.asarray(left_jac(x), dtype=float) + np.asarray(right_jac(x), dtype=float)  # noqa: E731
        left, right = self.raw, other.raw
        return VectorField(
            self.dim,
            lambda x: left(x) + right(x),
            jac,
            max(self.fd_scale, other.fd_scale),
            f"({self.name}+{other.name})" if self.name and other.name else "",
        )

    def __neg__(self) -> "VectorField":
        return self.scaled(-1.0)

    def __sub__(self, other: "VectorField") -> "VectorField":
        return self + (-other)

    @classmethod
    def zero(cls, dim: int) -> "VectorField":
        return cls(dim, lambda x: np.zeros(dim), lambda x: np.zeros((dim, dim)), name="0")

    @classmethod
    def linear(cls, matrix, name: str = "") -> "VectorField":
        mat = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(mat.shape[0], lambda x: mat @ x, lambda x: mat, name=name)


@dataclass(frozen=True)
class ScalarField:
    """A candidate Lyapunov function with optional analytic derivatives."""

    dim: int
    func: Callable[[np.ndarray], float]
    gradient_fn: Optional[StateFn] = None
    hessian_fn: Optional[MatrixFn] = None
    positive_definite: bool = True
    name: str = ""

    def __post_init__(self) -> None:
        if int(self.dim) <= 0:
            raise DimensionError("scalar field dimension must be positive")

    def raw(self, x: np.ndarray) -> float:
        return float(self.func(x))

    def __call__(self, x) -> float:
        state = as_state(x, self.dim)
        return float(_require_finite(self.raw(state), f"scalar field {self.name or '<anonymous>'}", state))

    def gradient(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        if self.gradient_fn is not None:
            grad = np.asarray(self.gradient_fn(state), dtype=float).reshape(self.dim)
            return _require_finite(grad, f"gradient of {self.name or '<anonymous>'}", state)
        return self.numeric_gradient(state)

    def numeric_gradient(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        h = _fd_step(state, GRADIENT_STEP)
        grad = np.empty(self.dim)
        for j in range(self.dim):
            step = np.zeros_like(state)
            step[j] = h
            grad[j] = (self.raw(state + step) - self.raw(state - step)) / (2.0 * h)
        return _require_finite(grad, f"numeric gradient of {self.name or '<anonymous>'}", state)

    def hessian(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        if self.hessian_fn is not None:
            hess = np.asarray(self.hessian_fn(state), dtype=float).reshape(self.dim, self.dim)
            return _require_finite(hess, f"Hessian of {self.name or '<anonymous>'}", state)
        return self.numeric_hessian(state)

    def numeric_hessian(self, x) -> np.ndarray:
        state = as_state(x, self.dim)
        if self.gradient_fn is not None:
            grad_fn = self.gradient_fn
            hess = _central_jacobian(lambda z: np.asarray(grad_fn(z), dtype=float), state, GRADIENT_STEP, self.dim)
        else:
            hess = self._second_differences(state)
        hess = 0.5 * (hess + hess.T)
        return _require_finite(hess, f"numeric Hessian of {self.name or '<anonymous>'}", state)

    def _second_differences(self, x: np.ndarray) -> np.ndarray:
        h = _fd_step(x, NESTED_STEP)
        n = self.dim
        hess = np.empty((n, n))
        centre = self.raw(x)
        basis = np.eye(n) * h
        for i in range(n):
            hess[i, i] = (self.raw(x + basis[i]) - 2.0 * centre + self.raw(x - basis[i])) / (h * h)
            for j in range(i + 1, n):
                value = (
                    self.raw(x + basis[i] + basis[j])
                    - self.raw(x + basis[i] - basis[j])
                    - self.raw(x - basis[i] + basis[j])
                    + self.raw(x - basis[i] - basis[j])
                ) / (4.0 * h * h)
                hess[i, j] = hess[j, i] = value
        return hess

    def check_positive_definite(self, grid: Sequence, tol: float = 1e-12) -> List[np.ndarray]:
        """Return the probe points where positive definiteness fails."""

        failures: List[np.ndarray] = []
        origin = np.zeros(self.dim)
        if abs(self(origin)) > tol:
            failures.append(origin)
        for point in grid:
            state = as_state(point, self.dim)
            if np.linalg.norm(state) == 0.0:
                continue
            if self(state) <= 0.0:
                failures.append(state)
        return failures

    @classmethod
    def squared_norm(cls, dim: int, weight: float = 0.5, name: str = "") -> "ScalarField":
        """``weight * |x|²`` with analytic derivatives."""

        weight = float(weight)
        return cls(
            dim,
            lambda x: weight * float(x @ x),
            lambda x: 2.0 * weight * x,
            lambda x: 2.0 * weight * np.eye(dim),
            name=name or f"{weight:g}|x|^2",
        )


class Shape(str, Enum):
    GENERAL = "general"
    AFFINE = "affine"
    DRIFTLESS = "driftless"


@dataclass(frozen=True)
class ControlSystem:
    """Dynamics ẋ = F(x, u) in one of three shapes."""

    shape: Shape
    state_dim: int
    input_dim: int
    dynamics: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None
    drift: Optional[VectorField] = None
    input_field: Optional[VectorField] = None
    fields: Tuple[VectorField, ...] = field(default_factory=tuple)
    name: str = ""

    def __post_init__(self) -> None:
        if self.state_dim <= 0 or self.input_dim <= 0:
            raise DimensionError("state and input dimensions must be positive")
        if self.shape is Shape.GENERAL:
            if self.dynamics is None:
                raise DimensionError("general systems need a dynamics callable")
        elif self.shape is Shape.AFFINE:
            if self.drift is None or self.input_field is None:
                raise DimensionError("affine systems need both f and g")
            if self.input_dim != 1:
                raise DimensionError("affine systems are single-input")
            for vf in (self.drift, self.input_field):
                if vf.dim != self.state_dim:
                    raise DimensionError("affine fields must match the state dimension")
        elif self.shape is Shape.DRIFTLESS:
            if len(self.fields) != self.input_dim:
                raise DimensionError("driftless systems need one field per input")
            for vf in self.fields:
                if vf.dim != self.state_dim:
                    raise DimensionError("driftless fields must match the state dimension")

    @classmethod
    def general(cls, dynamics, state_dim: int, input_dim: int, name: str = "") -> "ControlSystem":
        return cls(Shape.GENERAL, state_dim, input_dim, dynamics=dynamics, name=name)

    @classmethod
    def affine(cls, drift: VectorField, input_field: VectorField, name: str = "") -> "ControlSystem":
        return cls(Shape.AFFINE, drift.dim, 1, drift=drift, input_field=input_field, name=name)

    @classmethod
    def driftless(cls, fields: Sequence[VectorField], name: str = "") -> "ControlSystem":
        fields = tuple(fields)
        if not fields:
            raise DimensionError("driftless systems need at least one field")
        return cls(Shape.DRIFTLESS, fields[0].dim, len(fields), fields=fields, name=name)

    @property
    def f(self) -> VectorField:
        if self.drift is None:
            raise DimensionError(f"{self.shape.value} system has no drift field")
        return self.drift

    @property
    def g(self) -> VectorField:
        if self.input_field is None:
            raise DimensionError(f"{self.shape.value} system has no input field")
        return self.input_field

    def rhs(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Evaluate F(x, u) without validation; callers check finiteness."""

        if self.shape is Shape.AFFINE:
            return self.drift.raw(x) + u[0] * self.input_field.raw(x)
        if self.shape is Shape.DRIFTLESS:
            total = np.zeros(self.state_dim)
            for ui, vf in zip(u, self.fields):
                if ui != 0.0:
                    total = total + ui * vf.raw(x)
            return total
        return np.asarray(self.dynamics(x, u), dtype=float).reshape(-1)

    def velocity(self, x, u) -> np.ndarray:
        state = as_state(x, self.state_dim)
        control = as_state(u, self.input_dim)
        value = self.rhs(state, control)
        if value.shape[0] != self.state_dim:
            raise DimensionError("dynamics returned a vector of the wrong dimension")
        return _require_finite(value, f"dynamics of {self.name or self.shape.value}", state)

    def vector_field(self, u) -> VectorField:
        """The autonomous field obtained by holding the control ``u``."""

        control = as_state(u, self.input_dim)
        if self.shape is Shape.AFFINE:
            return self.drift + self.input_field.scaled(control[0])
        if self.shape is Shape.DRIFTLESS:
            result = VectorField.zero(self.state_dim)
            for ui, vf in zip(control, self.fields):
                result = result + vf.scaled(ui)
            return result
        dynamics = self.dynamics
        return VectorField(self.state_dim, lambda x: np.asarray(dynamics(x, control), dtype=float))

    def check_equilibrium(self, tol: float = 1e-12) -> bool:
        origin = np.zeros(self.state_dim)
        if self.shape is Shape.DRIFTLESS:
            return all(float(np.linalg.norm(vf(origin))) <= tol for vf in self.fields)
        return float(np.linalg.norm(self.velocity(origin, np.zeros(self.input_dim)))) <= tol


def _check_dims(*dims: int) -> None:
    if len(set(dims)) != 1:
        raise DimensionError(f"dimension mismatch: {dims}")


def lie_derivative(X: VectorField, phi: ScalarField, x) -> float:
    """XΦ(x) = DΦ(x)·X(x)."""

    state = as_state(x)
    _check_dims(X.dim, phi.dim, state.shape[0])
    return float(phi.gradient(state) @ X(state))


def second_lie(X: VectorField, Y: VectorField, phi: ScalarField, x) -> float:
    """X(YΦ)(x): the derivative along X of y ↦ DΦ(y)·Y(y)."""

    state = as_state(x)
    _check_dims(X.dim, Y.dim, phi.dim, state.shape[0])
    grad_y_phi = phi.hessian(state) @ Y(state) + Y.jacobian(state).T @ phi.gradient(state)
    return float(X(state) @ grad_y_phi)


def bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = DY·X − DX·Y; the result has a numeric Jacobian."""

    _check_dims(X.dim, Y.dim)

    def evaluate(z: np.ndarray) -> np.ndarray:
        return Y.jacobian(z) @ X(z) - X.jacobian(z) @ Y(z)

    name = f"[{X.name},{Y.name}]" if X.name and Y.name else ""
    return VectorField(X.dim, evaluate, None, NESTED_STEP, name)


def lie_span_rank(fields: Sequence[VectorField], point, depth: int = 2,
                  rel_tol: float = 1e-8) -> Tuple[int, np.ndarray]:
    """Rank of the span of ``fields`` and their brackets up to ``depth`` at ``point``.

    Depth 1 adds pairwise brackets, depth 2 adds brackets of those with the
    generators. Singular values below ``rel_tol * max`` are treated as zero.
    """

    state = as_state(point)
    generators = list(fields)
    levels: List[List[VectorField]] = [generators]
    if depth >= 1:
        levels.append(
            [bracket(generators[i], generators[j]) for i in range(len(generators)) for j in range(i + 1, len(generators))]
        )
    if depth >= 2:
        levels.append([bracket(gen, inner) for inner in levels[1] for gen in generators])

    columns = [vf(state) for level in levels for vf in level]
    matrix = np.column_stack(columns) if columns else np.zeros((state.shape[0], 0))
    if matrix.size == 0:
        return 0, matrix
    singular_values = np.linalg.svd(matrix, compute_uv=False)
    top = float(singular_values.max()) if singular_values.size else 0.0
    if top == 0.0:
        return 0, matrix
    return int(np.sum(singular_values > rel_tol * top)), matrix


@dataclass
class ClfViolation:
    """A grid point where the bracket CLF implication does not hold."""

    point: np.ndarray
    clause: str
    f_phi: float
    g_phi: float
    bracket_phi: float

    def as_dict(self) -> dict[str, object]:
        return {
            "point": [float(v) for v in self.point],
            "clause": self.clause,
            "f_phi": self.f_phi,
            "g_phi": self.g_phi,
            "bracket_phi": self.bracket_phi,
        }


@dataclass
class ClfImplicationReport:
    """Outcome of checking the CLF implication on a grid."""

    points_checked: int = 0
    points_skipped: int = 0
    singular_points: int = 0
    violations: List[ClfViolation] = field(default_factory=list)

    @property
    def is_successful(self) -> bool:
        return not self.violations

    def as_dict(self) -> dict[str, object]:
        return {
            "points_checked": self.points_checked,
            "points_skipped": self.points_skipped,
            "singular_points": self.singular_points,
            "violations": [violation.as_dict() for violation in self.violations],
            "is_successful": self.is_successful,
        }


def check_clf_implication(sys: ControlSystem, phi: ScalarField, grid: Sequence, tol: float) -> ClfImplicationReport:
    """Certify the implication gΦ = 0 ⇒ (fΦ < 0 or (fΦ = 0 and [f,g]Φ ≠ 0)) on ``grid``."""

    report = ClfImplicationReport()
    f, g = sys.f, sys.g
    fg = bracket(f, g)
    for point in grid:
        state = as_state(point, sys.state_dim)
        if float(np.linalg.norm(state)) == 0.0:
            report.points_skipped += 1
            continue
        report.points_checked += 1
        g_phi = lie_derivative(g, phi, state)
        if abs(g_phi) > tol:
            continue
        report.singular_points += 1
        f_phi = lie_derivative(f, phi, state)
        if f_phi < -tol:
            continue
        bracket_phi = lie_derivative(fg, phi, state)
        if abs(f_phi) <= tol and abs(bracket_phi) > tol:
            continue
        clause = "drift_not_decreasing" if abs(f_phi) > tol else "bracket_vanishes"
        report.violations.append(ClfViolation(state, clause, f_phi, g_phi, bracket_phi))
    if report.violations:
        logger.debug("CLF implication violated at %d of %d points", len(report.violations), report.points_checked)
    return report


__all__ = [
    "ClfImplicationReport",
    "ClfViolation",
    "ControlSystem",
    "GRADIENT_STEP",
    "NESTED_STEP",
    "ScalarField",
    "Shape",
    "VectorField",
    "as_state",
    "bracket",
    "check_clf_implication",
    "lie_derivative",
    "lie_span_rank",
    "second_lie",
]
