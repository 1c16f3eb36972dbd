"""Small-gain layer: comparison functions, gain checks and the composite stabilizer."""

from .class_k import ClassKFn, linear, power, saturating
from .controller import CompositeController, composite_controller
from .gains import (
    GainSetup,
    Regime,
    RegimeVariant,
    SmallGainReport,
    build_interpolants,
    check_small_gain,
    classify_regime,
    psi,
    q,
)
from .primitives import PrimitiveSearchOptions, SearchObjective, enumerate_candidates, primitive_search
from .rank import CompositeSystem, RankReport, check_rank_conditions

__all__ = [
    "ClassKFn",
    "CompositeController",
    "CompositeSystem",
    "GainSetup",
    "PrimitiveSearchOptions",
    "RankReport",
    "Regime",
    "RegimeVariant",
    "SearchObjective",
    "SmallGainReport",
    "build_interpolants",
    "check_rank_conditions",
    "check_small_gain",
    "classify_regime",
    "composite_controller",
    "enumerate_candidates",
    "linear",
    "power",
    "primitive_search",
    "psi",
    "q",
    "saturating",
]
