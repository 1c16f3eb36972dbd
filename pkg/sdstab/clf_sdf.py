"""Per-state synthesis for single-input affine systems ẋ = f(x) + u·g(x).

At a nonzero state the CLF Φ is classified into one of three cases:

* ``ControlAuthority`` (gΦ ≠ 0): hold ``u = (-1 - fΦ) / gΦ`` so that Φ starts
  decreasing at unit rate;
* ``DriftDecrease`` (gΦ ≈ 0, fΦ < 0): coast with zero input;
* ``BracketManeuver`` (gΦ ≈ fΦ ≈ 0, [f,g]Φ ≠ 0): run ``u`` for ``t`` seconds
  and then ``w - u`` for another ``t`` seconds. The second derivative of
  ``t ↦ Φ(R(t))`` at zero is ``A + 2u·[g,f]Φ`` and ``u`` is solved so that it
  equals ``-c``.

``dwell_search`` turns the chosen input into an accepted interval by halving
the dwell from σ until Φ decreases with margin and stays below ``(1 + slack)·Φ``.

Near the locus gΦ = 0 the Case-1 input grows like 1/gΦ and its favourable
window shrinks below any dwell the halving can reach. ``classify`` therefore
takes an ``authority_ratio``: authority only counts when
``|gΦ| ≥ ratio·|∇Φ|·|g|``, and weaker states coast or run the maneuver.
``ClfController`` retries the remaining applicable cases when the first
search is exhausted.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np

from .dynamics import ControlSystem, ScalarField, Shape, as_state, bracket, lie_derivative, second_lie
from .errors import (
    AuthorityTooSmall,
    BlowupError,
    BracketTooSmall,
    CLFConditionViolated,
    DimensionError,
    NoDecreaseFound,
    NumericsError,
    SdstabError,
)
from .integrate import DEFAULT_STEP, ControlSchedule, Trajectory, endpoint, integrate

logger = logging.getLogger(__name__)


class CaseVariant(str, Enum):
    CONTROL_AUTHORITY = "ControlAuthority"
    DRIFT_DECREASE = "DriftDecrease"
    BRACKET_MANEUVER = "BracketManeuver"


@dataclass(frozen=True)
class CaseTag:
    """Classification of a state together with its three witnesses."""

    variant: CaseVariant
    f_phi: float
    g_phi: float
    bracket_phi: float
    tol: float

    @property
    def label(self) -> str:
        return self.variant.value

    def as_dict(self) -> dict[str, object]:
        return {
            "variant": self.variant.value,
            "f_phi": self.f_phi,
            "g_phi": self.g_phi,
            "bracket_phi": self.bracket_phi,
            "tol": self.tol,
        }


@dataclass(frozen=True)
class ManeuverParams:
    """Solved two-phase maneuver; ``bracket_gf`` is ([g,f]Φ)(x)."""

    w: float
    c: float
    u: float
    A: float
    bracket_gf: float

    @property
    def second_order(self) -> float:
        return self.A + 2.0 * self.u * self.bracket_gf

    @property
    def phase_controls(self) -> tuple[float, float]:
        return self.u, self.w - self.u


@dataclass(frozen=True)
class DwellResult:
    """An accepted sampling interval."""

    tau: float
    schedule: ControlSchedule
    phi_start: float
    phi_end: float
    phi_peak: float
    label: str
    trajectory: Trajectory
    halvings: int = 0
    params: Optional[ManeuverParams] = None


@dataclass(frozen=True)
class SynthesisOptions:
    classification_tol: float = 1e-7
    slack: float = 0.5
    margin_mu: float = 1e-4
    max_halvings: int = 40
    maneuver_w: float = 0.0
    maneuver_c: float = 1.0
    scale_margin: bool = True
    authority_ratio: float = 0.05

    def __post_init__(self) -> None:
        if not 0.0 <= self.authority_ratio < 1.0:
            raise ValueError("authority_ratio must lie in [0, 1)")


def scaled_tol(base: float, x) -> float:
    return float(base) * (1.0 + float(np.linalg.norm(as_state(x))))


def _resolve_tol(tol: Optional[float], options: Optional[SynthesisOptions], state: np.ndarray) -> float:
    if tol is not None:
        return float(tol)
    return scaled_tol((options or SynthesisOptions()).classification_tol, state)


def _require_affine(sys: ControlSystem) -> None:
    if sys.shape is not Shape.AFFINE:
        raise DimensionError(f"expected an affine system, got {sys.shape.value}")


def _strong_authority(g_phi: float, authority_ratio: float, gradient: np.ndarray, g_value: np.ndarray) -> bool:
    if authority_ratio <= 0.0:
        return True
    scale = float(np.linalg.norm(gradient)) * float(np.linalg.norm(g_value))
    return abs(g_phi) >= authority_ratio * scale


def classify(sys: ControlSystem, phi: ScalarField, x, tol: float, authority_ratio: float = 0.0) -> CaseTag:
    """Tag ``x`` with its case.

    With ``authority_ratio = 0`` any |gΦ| > tol is Case 1. A positive ratio
    demotes states where gΦ is small against |∇Φ|·|g| to coasting or the
    maneuver, and only falls back to Case 1 when neither applies.
    """

    _require_affine(sys)
    state = as_state(x, sys.state_dim)
    if float(np.linalg.norm(state)) == 0.0:
        raise ValueError("classification is defined for nonzero states only")

    f, g = sys.f, sys.g
    g_phi = lie_derivative(g, phi, state)
    f_phi = lie_derivative(f, phi, state)
    bracket_phi = lie_derivative(bracket(f, g), phi, state)
    authority = abs(g_phi) > tol

    if authority and _strong_authority(g_phi, authority_ratio, phi.gradient(state), g(state)):
        variant = CaseVariant.CONTROL_AUTHORITY
    elif f_phi < -tol:
        variant = CaseVariant.DRIFT_DECREASE
    elif abs(bracket_phi) > tol and (abs(f_phi) <= tol or authority):
        variant = CaseVariant.BRACKET_MANEUVER
    elif authority:
        variant = CaseVariant.CONTROL_AUTHORITY
    else:
        raise CLFConditionViolated(state, {"f_phi": f_phi, "g_phi": g_phi, "bracket_phi": bracket_phi})
    return CaseTag(variant, f_phi, g_phi, bracket_phi, float(tol))


def applicable_variants(tag: CaseTag) -> list[CaseVariant]:
    """``tag.variant`` first, then every other case whose witness clears tol."""

    candidates = []
    if abs(tag.g_phi) > tag.tol:
        candidates.append(CaseVariant.CONTROL_AUTHORITY)
    if tag.f_phi < -tag.tol:
        candidates.append(CaseVariant.DRIFT_DECREASE)
    if abs(tag.bracket_phi) > tag.tol:
        candidates.append(CaseVariant.BRACKET_MANEUVER)
    return [tag.variant] + [variant for variant in candidates if variant is not tag.variant]


def case1_control(
    sys: ControlSystem,
    phi: ScalarField,
    x,
    tol: Optional[float] = None,
    options: Optional[SynthesisOptions] = None,
) -> float:
    """The constant input making dΦ/dt = -1 at ``x``."""

    _require_affine(sys)
    state = as_state(x, sys.state_dim)
    tol = _resolve_tol(tol, options, state)
    g_phi = lie_derivative(sys.g, phi, state)
    if abs(g_phi) <= tol:
        raise AuthorityTooSmall(f"|gΦ|={abs(g_phi):.3g} does not exceed tol={tol:.3g}")
    f_phi = lie_derivative(sys.f, phi, state)
    return (-1.0 - f_phi) / g_phi


def _directional_part(X, Y, phi: ScalarField, state: np.ndarray, hess: np.ndarray) -> float:
    """DΦ·(DY X): the first-order part of X(YΦ)."""

    return second_lie(X, Y, phi, state) - float(X(state) @ hess @ Y(state))


def maneuver_assembly(sys: ControlSystem, phi: ScalarField, x, w: float) -> float:
    """The control-free terms A of the second-order coefficient."""

    _require_affine(sys)
    state = as_state(x, sys.state_dim)
    f, g = sys.f, sys.g
    hess = phi.hessian(state)
    direction = 2.0 * f(state) + w * g(state)
    quadratic = float(direction @ hess @ direction)
    ff = _directional_part(f, f, phi, state, hess)
    gf = _directional_part(g, f, phi, state, hess)
    fg = _directional_part(f, g, phi, state, hess)
    gg = _directional_part(g, g, phi, state, hess)
    return quadratic + 4.0 * ff + w * gf + 3.0 * w * fg + w * w * gg


def maneuver_solve(
    sys: ControlSystem,
    phi: ScalarField,
    x,
    w: float = 0.0,
    c: float = 1.0,
    tol: Optional[float] = None,
    options: Optional[SynthesisOptions] = None,
) -> ManeuverParams:
    if not c > 0.0:
        raise ValueError("maneuver margin c must be positive")
    _require_affine(sys)
    state = as_state(x, sys.state_dim)
    tol = _resolve_tol(tol, options, state)
    bracket_gf = lie_derivative(bracket(sys.g, sys.f), phi, state)
    if abs(bracket_gf) <= tol:
        raise BracketTooSmall(f"|[g,f]Φ|={abs(bracket_gf):.3g} does not exceed tol={tol:.3g}")
    A = maneuver_assembly(sys, phi, state, w)
    u = (-c - A) / (2.0 * bracket_gf)
    return ManeuverParams(w=float(w), c=float(c), u=float(u), A=float(A), bracket_gf=float(bracket_gf))


def maneuver_schedule(params: ManeuverParams, t: float) -> ControlSchedule:
    first, second = params.phase_controls
    return ControlSchedule.from_pairs([(t, [first]), (t, [second])])


def second_order_coefficient(sys: ControlSystem, phi: ScalarField, x, params: ManeuverParams) -> float:
    """d²/dt² Φ(R(t)) at t = 0, assembled from the two phase fields.

    With X = f + (w-u)g and Y = f + ug this is (X² + Y² + 2YX)Φ and equals
    ``params.second_order`` up to differentiation error.
    """

    state = as_state(x, sys.state_dim)
    first, second = params.phase_controls
    Y = sys.vector_field([first])
    X = sys.vector_field([second])
    return (
        second_lie(X, X, phi, state)
        + second_lie(Y, Y, phi, state)
        + 2.0 * second_lie(Y, X, phi, state)
    )


def maneuver_rollout(
    sys: ControlSystem,
    phi: ScalarField,
    x0,
    params: ManeuverParams,
    t: float,
    step: Optional[float] = None,
) -> np.ndarray:
    """R(t) = (X_t ∘ Y_t)(x0)."""

    state = as_state(x0, sys.state_dim)
    if t < 0.0:
        raise ValueError("maneuver duration must be non-negative")
    if t == 0.0:
        return state.copy()
    return endpoint(sys, state, maneuver_schedule(params, t), step)


def _candidate_schedule(tag: CaseTag, tau: float, control: float, params: Optional[ManeuverParams]) -> ControlSchedule:
    if tag.variant is CaseVariant.BRACKET_MANEUVER:
        return maneuver_schedule(params, 0.5 * tau)
    return ControlSchedule.constant(tau, [control])


def dwell_search(
    sys: ControlSystem,
    phi: ScalarField,
    x,
    sigma: float,
    tag: CaseTag,
    step: Optional[float] = None,
    options: SynthesisOptions = SynthesisOptions(),
) -> DwellResult:
    if not sigma > 0.0:
        raise ValueError("sigma must be positive")
    state = as_state(x, sys.state_dim)
    phi_start = phi(state)
    bound = (1.0 + options.slack) * phi_start
    base_step = DEFAULT_STEP if step is None else step

    control = 0.0
    params: Optional[ManeuverParams] = None
    if tag.variant is CaseVariant.CONTROL_AUTHORITY:
        control = case1_control(sys, phi, state, tag.tol)
    elif tag.variant is CaseVariant.BRACKET_MANEUVER:
        c = options.maneuver_c
        if options.scale_margin:
            c *= 1.0 + float(state @ state)
        params = maneuver_solve(sys, phi, state, options.maneuver_w, c, tag.tol)

    tau = float(sigma)
    for halving in range(options.max_halvings + 1):
        schedule = _candidate_schedule(tag, tau, control, params)
        h = min(base_step, tau / (10.0 * len(schedule)))
        try:
            trajectory = integrate(sys, state, schedule, h)
        except (BlowupError, NumericsError) as exc:
            logger.debug("dwell %.3g rejected at %s: %s", tau, state.tolist(), exc)
            tau *= 0.5
            continue
        values = trajectory.values(phi)
        phi_end = float(values[-1])
        phi_peak = float(np.max(values))
        if (
            math.isfinite(phi_end)
            and phi_end < phi_start - options.margin_mu * phi_start * tau * tau
            and phi_peak <= bound
        ):
            return DwellResult(
                tau=tau,
                schedule=schedule,
                phi_start=phi_start,
                phi_end=phi_end,
                phi_peak=phi_peak,
                label=tag.label,
                trajectory=trajectory,
                halvings=halving,
                params=params,
            )
        tau *= 0.5

    raise NoDecreaseFound(state, options.max_halvings, tag.label)


@dataclass
class ClfController:
    """Sampled-data synthesizer: classify, then search the dwell."""

    system: ControlSystem
    phi: ScalarField
    options: SynthesisOptions = field(default_factory=SynthesisOptions)

    def value(self, x) -> float:
        return self.phi(x)

    def synthesize(self, x, sigma: float, step: Optional[float] = None) -> DwellResult:
        tol = scaled_tol(self.options.classification_tol, x)
        tag = classify(self.system, self.phi, x, tol, self.options.authority_ratio)
        failures: list[SdstabError] = []
        for variant in applicable_variants(tag):
            attempt = replace(tag, variant=variant)
            try:
                return dwell_search(self.system, self.phi, x, sigma, attempt, step, self.options)
            except (NoDecreaseFound, AuthorityTooSmall, BracketTooSmall) as exc:
                logger.debug("%s search failed at %s: %s", attempt.label, as_state(x).tolist(), exc)
                failures.append(exc)
        raise failures[0]


__all__ = [
    "CaseTag",
    "CaseVariant",
    "ClfController",
    "DwellResult",
    "ManeuverParams",
    "SynthesisOptions",
    "applicable_variants",
    "case1_control",
    "classify",
    "dwell_search",
    "maneuver_assembly",
    "maneuver_rollout",
    "maneuver_schedule",
    "maneuver_solve",
    "scaled_tol",
    "second_order_coefficient",
]
