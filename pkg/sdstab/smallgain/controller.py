"""Regime dispatch for the composite stabilizer.

Above the switching locus W = ℓ₁(V) the y-subsystem is steered, below it the
x-subsystem, and inside the band both values must drop together. The ledger
value is Ψ₁ = max{W, ℓ₁(V)}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..clf_sdf import DwellResult
from .gains import DEFAULT_BAND, GainSetup, Regime, RegimeVariant, classify_regime, psi, q
from .primitives import DecreaseTerm, PrimitiveSearchOptions, SearchObjective, default_margin, primitive_search
from .rank import CompositeSystem

logger = logging.getLogger(__name__)


def objective_for(setup: GainSetup, comp: CompositeSystem, regime: Regime, w_start: float,
                  options: PrimitiveSearchOptions) -> SearchObjective:
    ell1 = setup.ell(1)
    n = comp.x_dim

    def v_of(xi: np.ndarray) -> float:
        return setup.V.raw(xi[:n])

    def w_of(xi: np.ndarray) -> float:
        return setup.W.raw(xi[n:])

    margin = default_margin(options.margin_mu)

    if regime.variant is RegimeVariant.STEER_X:
        return SearchObjective(
            label=regime.label,
            active=v_of,
            terms=(DecreaseTerm("V", v_of, margin),),
            constraint=lambda xi: w_of(xi) < ell1(v_of(xi)),
            frozen="x",
            frozen_value=setup.V.raw,
        )
    if regime.variant is RegimeVariant.STEER_Y:
        if setup.bounded and w_start >= setup.r:
            y_margin = lambda start, tau: q(start)  # noqa: E731
        else:
            y_margin = margin
        return SearchObjective(
            label=regime.label,
            active=w_of,
            terms=(DecreaseTerm("W", w_of, y_margin),),
            constraint=lambda xi: ell1(v_of(xi)) < w_of(xi),
            frozen="y",
            frozen_value=setup.W.raw,
        )
    return SearchObjective(
        label=regime.label,
        active=lambda xi: max(w_of(xi), ell1(v_of(xi))),
        terms=(DecreaseTerm("V", v_of, margin), DecreaseTerm("W", w_of, margin)),
    )


def composite_controller(
    setup: GainSetup,
    comp: CompositeSystem,
    x,
    y,
    sigma: float,
    step: Optional[float] = None,
    options: PrimitiveSearchOptions = PrimitiveSearchOptions(),
    band: float = DEFAULT_BAND,
) -> DwellResult:
    xi = comp.join(x, y)
    regime = classify_regime(setup, xi[: comp.x_dim], xi[comp.x_dim:], band)
    logger.debug("regime %s: W=%.6g ell1(V)=%.6g", regime.label, regime.w_value, regime.ell_value)
    objective = objective_for(setup, comp, regime, regime.w_value, options)
    return primitive_search(comp, objective, xi, sigma, step, options)


@dataclass
class CompositeController:
    """Sampled-data synthesizer on stacked states ξ = (x, y); certifies Ψ₁."""

    setup: GainSetup
    composite: CompositeSystem
    options: PrimitiveSearchOptions = field(default_factory=PrimitiveSearchOptions)
    band: float = DEFAULT_BAND

    def value(self, xi) -> float:
        x, y = self.composite.split(xi)
        return psi(self.setup, 1, x, y)

    def synthesize(self, xi, sigma: float, step: Optional[float] = None) -> DwellResult:
        x, y = self.composite.split(xi)
        return composite_controller(self.setup, self.composite, x, y, sigma, step, self.options, self.band)


__all__ = ["CompositeController", "composite_controller", "objective_for"]
