"""Scenario catalogue.

``example1``
    ẋ = (a, a) + u (x1, -x2) with V = |x|²/2 and, by default,
    a(x1, x2) = -(x1 + x2) - x1³. A user-supplied ``system.a`` expression is
    accepted when a(0,0) = 0, x1·a(x1, x1) < 0 and a(x1, -x1) ≠ 0 on a probe line.

``example2``
    ξ̇ = u1 (x, y) + u2 (x³, -y³) with V = x², W = y², a = b = s² and
    γ₁(s) = 2s, Γ₂(s) = s. ``system.gains = "bounded"`` swaps in gains with
    the same ratio near zero that saturate at 2 and 1.

``custom``
    A single-input affine system written as sympy expressions in x1..xn.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, List, Mapping, Optional

import numpy as np
import sympy as sp

from ..clf_sdf import ClfController, SynthesisOptions
from ..dynamics import ControlSystem, ScalarField, VectorField
from ..errors import ConfigValidationError
from ..sampled_loop import Controller
from ..smallgain import (
    ClassKFn,
    CompositeController,
    CompositeSystem,
    GainSetup,
    PrimitiveSearchOptions,
    check_rank_conditions,
    linear,
    power,
)
from .config import ScenarioConfig, Tolerances

logger = logging.getLogger(__name__)

EXAMPLE1_A = "-(x1 + x2) - x1**3"
PROBE_LINE = np.concatenate([np.linspace(-3.0, -0.05, 30), np.linspace(0.05, 3.0, 30)])


@dataclass
class BuiltinScenario:
    name: str
    system: ControlSystem
    phi: Optional[ScalarField] = None
    setup: Optional[GainSetup] = None
    composite: Optional[CompositeSystem] = None
    a1: Optional[ClassKFn] = None
    parameters: Mapping[str, Any] = field(default_factory=dict)

    @property
    def is_composite(self) -> bool:
        return self.composite is not None

    def make_controller(
        self,
        tolerances: Tolerances = Tolerances(),
        search: Optional[Mapping[str, Any]] = None,
    ) -> Controller:
        if self.composite is not None:
            return CompositeController(
                self.setup,
                self.composite,
                _search_options(tolerances, search or {}),
                band=tolerances.band,
            )
        options = SynthesisOptions(
            classification_tol=tolerances.classification_tol,
            slack=tolerances.slack,
            margin_mu=tolerances.margin_mu,
            authority_ratio=tolerances.authority_ratio,
        )
        return ClfController(self.system, self.phi, options)


def _search_options(tolerances: Tolerances, search: Mapping[str, Any]) -> PrimitiveSearchOptions:
    kwargs: dict[str, Any] = {"slack": tolerances.slack, "margin_mu": tolerances.margin_mu}
    if "amplitudes" in search:
        amplitudes = search["amplitudes"]
        if not isinstance(amplitudes, list) or not amplitudes:
            raise ConfigValidationError("search.amplitudes", "expected a nonempty list of numbers")
        kwargs["amplitudes"] = tuple(float(a) for a in amplitudes)
    if "max_halvings" in search:
        kwargs["max_halvings"] = int(search["max_halvings"])
    if "prerank" in search:
        kwargs["prerank"] = bool(search["prerank"])
    try:
        return PrimitiveSearchOptions(**kwargs)
    except ValueError as exc:
        raise ConfigValidationError("search", str(exc)) from exc


def _symbols(dim: int) -> List[sp.Symbol]:
    return list(sp.symbols(f"x1:{dim + 1}", real=True))


def _parse_expression(text: Any, symbols: List[sp.Symbol], field_name: str) -> sp.Expr:
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        text = str(text)
    if not isinstance(text, str):
        raise ConfigValidationError(field_name, "expected an expression string")
    try:
        expr = sp.sympify(text, locals={s.name: s for s in symbols})
    except (sp.SympifyError, SyntaxError, TypeError) as exc:
        raise ConfigValidationError(field_name, f"cannot parse {text!r}: {exc}") from exc
    unknown = expr.free_symbols - set(symbols)
    if unknown:
        names = ", ".join(sorted(str(s) for s in unknown))
        raise ConfigValidationError(field_name, f"unknown symbols {names}; use {', '.join(s.name for s in symbols)}")
    return expr


def _numeric(exprs: List[sp.Expr], symbols: List[sp.Symbol]) -> Callable[[np.ndarray], np.ndarray]:
    compiled = sp.lambdify(symbols, exprs, modules="numpy")
    return lambda x: np.array(compiled(*x), dtype=float).reshape(-1)


def _scalar(expr: sp.Expr, symbols: List[sp.Symbol]) -> Callable[[np.ndarray], float]:
    compiled = sp.lambdify(symbols, expr, modules="numpy")
    return lambda x: float(compiled(*x))


def _check_example1_a(a: Callable[[np.ndarray], float], field_name: str) -> None:
    if abs(a(np.zeros(2))) > 1e-12:
        raise ConfigValidationError(field_name, "a(0, 0) must vanish")
    for x1 in PROBE_LINE:
        if not x1 * a(np.array([x1, x1])) < 0.0:
            raise ConfigValidationError(field_name, f"x1*a(x1, x1) < 0 fails at x1={x1:.3g}")
        if abs(a(np.array([x1, -x1]))) <= 1e-12:
            raise ConfigValidationError(field_name, f"a(x1, -x1) vanishes at x1={x1:.3g}")


def example1(a_expr: Optional[str] = None) -> BuiltinScenario:
    symbols = _symbols(2)
    if a_expr is None:
        def a(x: np.ndarray) -> float:
            return -(x[0] + x[1]) - x[0] ** 3

        def grad_a(x: np.ndarray) -> np.ndarray:
            return np.array([-1.0 - 3.0 * x[0] ** 2, -1.0])

        drift = VectorField(
            2,
            lambda x: np.full(2, a(x)),
            lambda x: np.vstack([grad_a(x), grad_a(x)]),
            name="f",
        )
        expression = EXAMPLE1_A
    else:
        parsed = _parse_expression(a_expr, symbols, "system.a")
        a = _scalar(parsed, symbols)
        drift = VectorField(2, lambda x: np.full(2, a(x)), name="f")
        expression = str(parsed)
    _check_example1_a(a, "system.a")

    input_field = VectorField.linear(np.diag([1.0, -1.0]), name="g")
    system = ControlSystem.affine(drift, input_field, name="example1")
    return BuiltinScenario(
        name="example1",
        system=system,
        phi=ScalarField.squared_norm(2, 0.5, name="V"),
        a1=power(2.0, 0.5, name="a1"),
        parameters={"a": expression},
    )


def _bounded_gain(coef: float, name: str) -> ClassKFn:
    """``coef·s/√(1+s²)``: linear near zero, saturating at ``coef``."""

    def inverse(v: float) -> float:
        ratio = v / coef
        return ratio / math.sqrt(1.0 - ratio * ratio) if ratio < 1.0 else math.inf

    return ClassKFn(lambda s: coef * s / math.sqrt(1.0 + s * s), unbounded=False, inverse_fn=inverse, name=name)


def example2_system() -> CompositeSystem:
    F1 = VectorField.linear(np.eye(2), name="F1")
    F2 = VectorField(
        2,
        lambda z: np.array([z[0] ** 3, -z[1] ** 3]),
        lambda z: np.diag([3.0 * z[0] ** 2, -3.0 * z[1] ** 2]),
        name="F2",
    )
    return CompositeSystem(ControlSystem.driftless([F1, F2], name="example2"), x_dim=1)


def example2_rank_grid() -> List[np.ndarray]:
    """Points off both axes on three circles."""

    angles = np.linspace(0.0, 2.0 * np.pi, 16, endpoint=False) + np.pi / 16.0
    return [radius * np.array([np.cos(t), np.sin(t)]) for radius in (0.25, 1.0, 2.5) for t in angles]


def example2(gains: str = "linear") -> BuiltinScenario:
    square = power(2.0, name="s^2")
    if gains == "linear":
        gamma1, Gamma2 = linear(2.0, name="gamma1"), linear(1.0, name="Gamma2")
    elif gains == "bounded":
        gamma1, Gamma2 = _bounded_gain(2.0, "gamma1"), _bounded_gain(1.0, "Gamma2")
    else:
        raise ConfigValidationError("system.gains", f"expected 'linear' or 'bounded', got {gains!r}")

    V = ScalarField.squared_norm(1, 1.0, name="V")
    W = ScalarField.squared_norm(1, 1.0, name="W")
    setup = GainSetup.build(V, W, square, square, square, square, gamma1, Gamma2)
    composite = example2_system()

    report = check_rank_conditions(composite, setup, example2_rank_grid())
    if not report.is_successful:
        raise ConfigValidationError("scenario", f"example2 rank conditions fail at {len(report.failures)} point(s)")

    return BuiltinScenario(
        name="example2",
        system=composite.system,
        setup=setup,
        composite=composite,
        parameters={"gains": gains},
    )


def custom(system: Mapping[str, Any]) -> BuiltinScenario:
    f_texts, g_texts, clf_text = system.get("f"), system.get("g"), system.get("clf")
    if not isinstance(f_texts, list) or not f_texts:
        raise ConfigValidationError("system.f", "expected a nonempty list of expressions")
    if not isinstance(g_texts, list) or len(g_texts) != len(f_texts):
        raise ConfigValidationError("system.g", f"expected {len(f_texts)} expressions")
    dim = len(f_texts)
    symbols = _symbols(dim)
    f_exprs = [_parse_expression(text, symbols, f"system.f[{i}]") for i, text in enumerate(f_texts)]
    g_exprs = [_parse_expression(text, symbols, f"system.g[{i}]") for i, text in enumerate(g_texts)]
    if clf_text is None:
        clf_expr = sum((s ** 2 for s in symbols), sp.Integer(0)) / 2
    else:
        clf_expr = _parse_expression(clf_text, symbols, "system.clf")

    drift = VectorField(dim, _numeric(f_exprs, symbols), name="f")
    input_field = VectorField(dim, _numeric(g_exprs, symbols), name="g")
    control_system = ControlSystem.affine(drift, input_field, name="custom")
    phi = ScalarField(dim, _scalar(clf_expr, symbols), name="clf")

    if not control_system.check_equilibrium():
        raise ConfigValidationError("system.f", "the drift must vanish at the origin")
    probes = [radius * row for radius in (0.1, 1.0, 3.0) for row in np.vstack([np.eye(dim), -np.eye(dim)])]
    if phi.check_positive_definite(probes):
        raise ConfigValidationError("system.clf", "the CLF must vanish at 0 and be positive elsewhere")

    return BuiltinScenario(
        name="custom",
        system=control_system,
        phi=phi,
        parameters={"f": [str(e) for e in f_exprs], "g": [str(e) for e in g_exprs], "clf": str(clf_expr)},
    )


def annulus_points(
    r_min: float,
    r_max: float,
    count: int,
    dim: int = 2,
    seed: Optional[int] = None,
) -> List[np.ndarray]:
    """``count`` points with r_min ≤ |x| ≤ r_max.

    Without a seed, planar grids walk a spiral with evenly spaced radii and
    angles; otherwise directions are Gaussian draws from ``default_rng(seed)``.
    """

    if not 0.0 <= r_min <= r_max or count <= 0:
        raise ValueError("annulus needs 0 <= r_min <= r_max and a positive count")
    radii = np.linspace(r_min, r_max, count) if count > 1 else np.array([r_min])
    if seed is None and dim == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return [r * np.array([np.cos(t), np.sin(t)]) for r, t in zip(radii, angles)]
    rng = np.random.default_rng(0 if seed is None else seed)
    points = []
    for _ in range(count):
        direction = rng.standard_normal(dim)
        points.append(direction / np.linalg.norm(direction) * rng.uniform(r_min, r_max))
    return points


def load_scenario(name: str, system: Optional[Mapping[str, Any]] = None) -> BuiltinScenario:
    system = system or {}
    if name == "example1":
        scenario = example1(system.get("a"))
    elif name == "example2":
        scenario = example2(system.get("gains", "linear"))
    elif name == "custom":
        scenario = custom(system)
    else:
        raise ConfigValidationError("scenario", f"unknown scenario {name!r}")
    logger.debug("loaded scenario %s with %s", name, dict(scenario.parameters))
    return scenario


def scenario_for(cfg: ScenarioConfig) -> BuiltinScenario:
    return load_scenario(cfg.scenario, cfg.system)


__all__ = [
    "BuiltinScenario",
    "annulus_points",
    "custom",
    "example1",
    "example2",
    "example2_system",
    "load_scenario",
    "scenario_for",
]
